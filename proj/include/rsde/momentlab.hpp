#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rsde/kernels.hpp"
#include "rsde/noise.hpp"

namespace rsde {

// Roots of x^2 = x + 1; they count compositions into parts >= 2.
inline constexpr double SQRT5 = 2.2360679774997896964;
inline constexpr double RHO1 = (1.0 - SQRT5) / 2.0;
inline constexpr double RHO2 = (1.0 + SQRT5) / 2.0;

// Deterministic kernel on [0,1] with exact norms and blockwise-exact integrals.
class TestFunction {
public:
    TestFunction(std::string name, std::function<double(double)> f,
                 std::function<double(double)> antiderivative,
                 std::function<double(double)> sq_antiderivative, double l2_norm,
                 double holder_alpha, double holder_seminorm);

    // Variant without Holder data (alpha unknown).
    TestFunction(std::string name, std::function<double(double)> f,
                 std::function<double(double)> antiderivative,
                 std::function<double(double)> sq_antiderivative, double l2_norm);

    double operator()(double r) const { return f_(r); }
    double integral(double a, double b) const;    // of f
    double sq_integral(double a, double b) const; // of f^2

    const std::string& name() const { return name_; }
    double l2_norm() const { return l2_; }
    bool has_holder() const { return has_holder_; }
    double alpha() const;
    double holder_seminorm() const;
    bool has_antiderivative() const { return static_cast<bool>(F_); }

private:
    void validate() const;

    std::string name_;
    std::function<double(double)> f_;
    std::function<double(double)> F_; // antiderivative of f, optional
    std::function<double(double)> G_; // antiderivative of f^2, optional
    double l2_;
    bool has_holder_ = false;
    double alpha_ = 0.0;
    double holder_ = 0.0;
};

// f in {1, r, r^0.4, sin(2 pi r)} with analytic L2 norms and Holder data.
const std::vector<TestFunction>& builtin_corpus();

// Band functional: integral of f^2(x) f^2(y) over |x-y| < eps^2 in the unit square.
double phi_f(const TestFunction& f, double eps);

// (1/eps^2) sum_k (integral of f over block_k in [0,1])^2 -- the exact second
// moment of int f theta; checked against the Cauchy-Schwarz cap on every call.
double second_moment_exact(const TestFunction& f, const RandomWalkNoise& noise);

enum class Verdict { respected, violated, inconclusive };
std::string verdict_name(Verdict v);

struct MomentReport {
    std::string check;
    std::string fname;
    std::string law;
    double epsilon = 0.0;
    int order = 0;
    double estimate = 0.0;   // |.| where the bound is one-sided
    double stderr_est = 0.0; // 0 for deterministic checks
    std::optional<double> exact;
    double bound = 0.0;
    std::map<std::string, double> bound_terms;
    Verdict verdict = Verdict::inconclusive;
    std::uint64_t n_samples = 0;

    nlohmann::json to_json() const;
};

// Monte Carlo pass shared by the moment checks: power sums of S = int f theta
// up to pmax, plus cos/sin(u S) for each requested u. One eta stream feeds
// every test function, and chunked accumulation keeps results independent of
// the thread count.
struct MomentStats {
    std::uint64_t n = 0;
    int pmax = 0;
    std::vector<kernels::Accum> psums;                  // powers 1..pmax
    std::vector<double> u_values;
    std::vector<kernels::Accum> cos_sums, sin_sums;     // per u
    std::vector<kernels::Accum> cos2_sums, sin2_sums;   // per u

    double moment(int p) const;
    double moment_se(int p) const; // needs 2p <= pmax
};

struct McMomentConfig {
    int pmax = 12;
    std::vector<double> u_values;
    std::size_t chunk = 4096;
};

std::vector<MomentStats> mc_moments(const std::vector<TestFunction>& fs,
                                    const RandomWalkNoise& noise, std::size_t n_samples,
                                    const McMomentConfig& cfg = {});

// Deterministic: J1 = |(1/2) E[S^2] - (1/2) ||f||^2| against eps^{2a} ||f|| ||f||_a.
MomentReport check_J1(const TestFunction& f, const RandomWalkNoise& noise);

MomentReport check_even_moment(const TestFunction& f, const RandomWalkNoise& noise, int m,
                               const MomentStats& stats);
MomentReport check_odd_moment(const TestFunction& f, const RandomWalkNoise& noise, int m,
                              const MomentStats& stats);
MomentReport check_Jm(const TestFunction& f, const RandomWalkNoise& noise, int m,
                      const MomentStats& stats);
MomentReport charfn_gap(const TestFunction& f, const RandomWalkNoise& noise, double u,
                        const MomentStats& stats);

// Convenience one-shot variants that run their own Monte Carlo pass.
MomentReport check_even_moment(const TestFunction& f, const RandomWalkNoise& noise, int m,
                               std::size_t n_samples);
MomentReport check_odd_moment(const TestFunction& f, const RandomWalkNoise& noise, int m,
                              std::size_t n_samples);
MomentReport check_Jm(const TestFunction& f, const RandomWalkNoise& noise, int m,
                      std::size_t n_samples);
MomentReport charfn_gap(const TestFunction& f, const RandomWalkNoise& noise, double u,
                        std::size_t n_samples);

struct DecompositionCount {
    int n = 0;
    std::optional<std::uint64_t> enumeration; // absent for n > 64
    std::uint64_t recurrence = 0;
    std::uint64_t closed_form = 0;
    bool agree() const {
        return recurrence == closed_form && (!enumeration || *enumeration == recurrence);
    }
};

// Number of ordered decompositions of n into parts >= 2, three ways.
DecompositionCount decomposition_count(int n);

} // namespace rsde
