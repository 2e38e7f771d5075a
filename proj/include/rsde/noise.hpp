#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "rsde/philox.hpp"

namespace rsde {

enum class LawKind { rademacher, scaled_uniform, custom_discrete };

// Law of the i.i.d. variables eta: centered, unit variance, a.s. bounded by k_eta.
class NoiseLaw {
public:
    static NoiseLaw rademacher();
    static NoiseLaw scaled_uniform();
    // Validates mean 0 and variance 1 to 1e-12; throws domain_error otherwise.
    static NoiseLaw custom_discrete(std::vector<std::pair<double, double>> atoms);

    LawKind kind() const { return kind_; }
    double k_eta() const { return k_eta_; }
    const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }
    std::string name() const;

    // Exact third moment (0 for the symmetric built-ins).
    double third_moment() const;

    // How many draws one 128-bit block yields, and the draw itself.
    int draws_per_block() const { return kind_ == LawKind::rademacher ? 4 : 2; }
    double draw(const Philox4x32::ctr_t& blk, int slot) const;

    nlohmann::json to_json() const;
    static NoiseLaw from_json(const nlohmann::json& j);

private:
    NoiseLaw(LawKind k, double bound, std::vector<std::pair<double, double>> atoms,
             std::vector<double> cum)
        : kind_(k), k_eta_(bound), atoms_(std::move(atoms)), cum_(std::move(cum)) {}

    LawKind kind_;
    double k_eta_;
    std::vector<std::pair<double, double>> atoms_; // custom_discrete only
    std::vector<double> cum_;                      // cumulative probabilities
};

// Anything the blockwise integrators can integrate exactly over a sub-interval.
struct Integrand {
    virtual ~Integrand() = default;
    virtual double integral(double a, double b) const = 0;
};

// Integrand backed by a closed-form antiderivative.
class AntiderivativeIntegrand final : public Integrand {
public:
    explicit AntiderivativeIntegrand(std::function<double(double)> antiderivative)
        : F_(std::move(antiderivative)) {}
    double integral(double a, double b) const override { return F_(b) - F_(a); }

private:
    std::function<double(double)> F_;
};

// Integrand evaluated by fixed-order Gauss-Legendre per sub-interval.
class QuadratureIntegrand final : public Integrand {
public:
    explicit QuadratureIntegrand(std::function<double(double)> f, int points = 16)
        : f_(std::move(f)), points_(points) {}
    double integral(double a, double b) const override;

private:
    std::function<double(double)> f_;
    int points_;
};

// The scaled step process: on block k = 1, 2, ... covering [(k-1)eps^2, k eps^2),
// theta^i(r) = eta_k^i / eps. eta_k^i is a pure function of
// (seed, replica, component, block): no sequential state anywhere.
class RandomWalkNoise {
public:
    RandomWalkNoise(double epsilon, NoiseLaw law, int dims, std::uint64_t seed,
                    double horizon = 1.0, std::uint32_t replica = 0);

    double epsilon() const { return eps_; }
    const NoiseLaw& law() const { return law_; }
    int dims() const { return dims_; }
    std::uint64_t seed() const { return seed_; }
    double horizon() const { return horizon_; }
    std::uint32_t replica() const { return replica_; }

    // Same configuration, independent Monte Carlo stream.
    RandomWalkNoise with_replica(std::uint32_t r) const;

    // floor(T / eps^2) + 1 addressable blocks.
    std::size_t n_blocks() const { return n_blocks_; }
    double block_start(std::size_t k) const { return static_cast<double>(k - 1) * eps2_; }
    double block_end(std::size_t k) const { return static_cast<double>(k) * eps2_; }
    // Block index holding time r in [0, horizon).
    std::size_t block_of(double r) const;

    double sample_eta(int component, std::size_t block) const;
    // eta for blocks k0 .. k0+count-1 of one component (bulk path of sample_eta).
    void fill_eta(int component, std::size_t k0, std::size_t count, double* out) const;

    double theta_at(int component, double r) const;

    // sum_k (eta_k/eps) * integral of f over block_k intersect [a,b], exact per block.
    double integrate_theta(int component, const Integrand& f, double a, double b) const;

private:
    void check_component(int i) const;

    double eps_;
    double eps2_;
    NoiseLaw law_;
    int dims_;
    std::uint64_t seed_;
    double horizon_;
    std::uint32_t replica_;
    std::size_t n_blocks_;
};

} // namespace rsde
