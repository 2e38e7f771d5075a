#include "rsde/noise.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "rsde/errors.hpp"
#include "rsde/kernels.hpp"
#include "rsde/quadrature.hpp"

namespace rsde {

namespace {
constexpr double SQRT3 = 1.7320508075688772935;
}

NoiseLaw NoiseLaw::rademacher() { return NoiseLaw(LawKind::rademacher, 1.0, {}, {}); }

NoiseLaw NoiseLaw::scaled_uniform() {
    return NoiseLaw(LawKind::scaled_uniform, SQRT3, {}, {});
}

NoiseLaw NoiseLaw::custom_discrete(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty())
        throw domain_error("custom law needs at least one atom");
    double psum = 0.0, mean = 0.0, var = 0.0, bound = 0.0;
    for (const auto& [v, p] : atoms) {
        if (!(p > 0.0))
            throw domain_error("atom probabilities must be positive");
        psum += p;
        mean += p * v;
        var += p * v * v;
        bound = std::max(bound, std::abs(v));
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw domain_error("atom probabilities must sum to 1");
    if (std::abs(mean) > 1e-12)
        throw domain_error("law must be centered: mean is " + std::to_string(mean));
    if (std::abs(var - 1.0) > 1e-12)
        throw domain_error("law must have unit variance: variance is " + std::to_string(var));
    std::vector<double> cum;
    cum.reserve(atoms.size());
    double c = 0.0;
    for (const auto& [v, p] : atoms) {
        (void)v;
        c += p;
        cum.push_back(c);
    }
    cum.back() = 1.0;
    return NoiseLaw(LawKind::custom_discrete, bound, std::move(atoms), std::move(cum));
}

std::string NoiseLaw::name() const {
    switch (kind_) {
    case LawKind::rademacher: return "rademacher";
    case LawKind::scaled_uniform: return "scaled_uniform";
    case LawKind::custom_discrete: return "custom_discrete";
    }
    return "?";
}

double NoiseLaw::third_moment() const {
    if (kind_ != LawKind::custom_discrete)
        return 0.0; // both built-ins are symmetric
    double m3 = 0.0;
    for (const auto& [v, p] : atoms_)
        m3 += p * v * v * v;
    return m3;
}

double NoiseLaw::draw(const Philox4x32::ctr_t& blk, int slot) const {
    switch (kind_) {
    case LawKind::rademacher:
        return (blk[slot] & 1u) ? 1.0 : -1.0;
    case LawKind::scaled_uniform: {
        const double u = slot == 0 ? u01(blk[0], blk[1]) : u01(blk[2], blk[3]);
        return SQRT3 * (2.0 * u - 1.0);
    }
    case LawKind::custom_discrete: {
        const double u = slot == 0 ? u01(blk[0], blk[1]) : u01(blk[2], blk[3]);
        for (std::size_t a = 0; a + 1 < cum_.size(); ++a)
            if (u < cum_[a])
                return atoms_[a].first;
        return atoms_.back().first;
    }
    }
    return 0.0;
}

nlohmann::json NoiseLaw::to_json() const {
    nlohmann::json j;
    j["kind"] = name();
    j["k_eta"] = k_eta_;
    if (kind_ == LawKind::custom_discrete) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& [v, p] : atoms_)
            a.push_back({v, p});
        j["atoms"] = a;
    }
    return j;
}

NoiseLaw NoiseLaw::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rademacher")
        return rademacher();
    if (kind == "scaled_uniform")
        return scaled_uniform();
    if (kind == "custom_discrete") {
        std::vector<std::pair<double, double>> atoms;
        for (const auto& a : j.at("atoms"))
            atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
        return custom_discrete(std::move(atoms));
    }
    throw domain_error("unknown noise law kind: " + kind);
}

double QuadratureIntegrand::integral(double a, double b) const {
    return gauss_legendre(f_, a, b, points_);
}

RandomWalkNoise::RandomWalkNoise(double epsilon, NoiseLaw law, int dims, std::uint64_t seed,
                                 double horizon, std::uint32_t replica)
    : eps_(epsilon), eps2_(epsilon * epsilon), law_(std::move(law)), dims_(dims),
      seed_(seed), horizon_(horizon), replica_(replica) {
    if (!(eps_ > 0.0))
        throw domain_error("epsilon must be positive");
    if (dims_ < 1)
        throw domain_error("dims must be >= 1");
    if (!(horizon_ >= 1.0))
        throw domain_error("horizon must be >= 1");
    n_blocks_ = static_cast<std::size_t>(std::floor(horizon_ / eps2_)) + 1;
}

RandomWalkNoise RandomWalkNoise::with_replica(std::uint32_t r) const {
    RandomWalkNoise copy = *this;
    copy.replica_ = r;
    return copy;
}

std::size_t RandomWalkNoise::block_of(double r) const {
    if (!(r >= 0.0) || r >= horizon_)
        throw domain_error("time outside [0, horizon)");
    std::size_t k = static_cast<std::size_t>(std::floor(r / eps2_)) + 1;
    return std::min(k, n_blocks_);
}

void RandomWalkNoise::check_component(int i) const {
    if (i < 1 || i > dims_)
        throw domain_error("component index out of range");
}

double RandomWalkNoise::sample_eta(int component, std::size_t block) const {
    check_component(component);
    if (block < 1 || block > n_blocks_)
        throw domain_error("block index out of range");
    const int per = law_.draws_per_block();
    const std::uint32_t idx = static_cast<std::uint32_t>((block - 1) / per);
    const auto blk = rng_block(seed_, RngStream::noise, replica_,
                               static_cast<std::uint32_t>(component), idx);
    const double v = law_.draw(blk, static_cast<int>((block - 1) % per));
    assert(std::abs(v) <= law_.k_eta() * (1.0 + 1e-15));
    return v;
}

void RandomWalkNoise::fill_eta(int component, std::size_t k0, std::size_t count,
                               double* out) const {
    check_component(component);
    if (k0 < 1 || count == 0)
        throw domain_error("block range out of range");
    if (k0 + count - 1 > n_blocks_)
        throw domain_error("block range out of range");
    const int per = law_.draws_per_block();
    std::size_t written = 0;
    std::size_t k = k0;
    while (written < count) {
        const std::uint32_t idx = static_cast<std::uint32_t>((k - 1) / per);
        const auto blk = rng_block(seed_, RngStream::noise, replica_,
                                   static_cast<std::uint32_t>(component), idx);
        int slot = static_cast<int>((k - 1) % per);
        for (; slot < per && written < count; ++slot, ++k) {
            out[written++] = law_.draw(blk, slot);
            assert(std::abs(out[written - 1]) <= law_.k_eta() * (1.0 + 1e-15));
        }
    }
}

double RandomWalkNoise::theta_at(int component, double r) const {
    return sample_eta(component, block_of(r)) / eps_;
}

double RandomWalkNoise::integrate_theta(int component, const Integrand& f, double a,
                                        double b) const {
    check_component(component);
    if (!(a >= 0.0) || !(b <= horizon_) || a > b)
        throw domain_error("integration interval outside [0, horizon]");
    if (a == b)
        return 0.0;
    const std::size_t ka = static_cast<std::size_t>(std::floor(a / eps2_)) + 1;
    kernels::Accum acc;
    for (std::size_t k = ka; k <= n_blocks_; ++k) {
        const double lo = std::max(a, block_start(k));
        const double hi = std::min({b, block_end(k), horizon_});
        if (lo >= hi) {
            if (block_start(k) >= b)
                break;
            continue;
        }
        acc.add(sample_eta(component, k) / eps_ * f.integral(lo, hi));
    }
    return acc.value();
}

} // namespace rsde
