#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsde/driver.hpp"
#include "rsde/fbm.hpp"

namespace rsde {

// dy = sigma(y) dZ + b(y) dt with an analytic Jacobian of sigma.
// sigma is n x d row-major; dsigma[(a*d + i)*n + c] = d sigma[a,i] / d y[c].
struct VectorFieldSpec {
    int n = 1;
    int d = 1;
    std::function<void(const double* y, double* sigma)> sigma;
    std::function<void(const double* y, double* dsigma)> dsigma;
    std::function<void(const double* y, double* b)> drift; // may be null for b = 0
    std::vector<double> a; // initial point

    // smoothness attestations (sup-norm bounds supplied by the caller)
    double sigma_bound = 0.0;
    double dsigma_bound = 0.0;
    double d2sigma_bound = 0.0;
    double drift_bound = 0.0;
};

// Grid increments and per-step areas of a level-2 rough driver. The area
// convention matches AreaMatrix: entry (i,j) integrates component j against dZ^i.
struct RoughDriverGrid {
    std::vector<double> times;      // N+1
    int d = 0;
    std::vector<double> increments; // N x d
    std::vector<double> areas;      // N x d x d

    std::size_t steps() const { return times.size() - 1; }
    double increment(std::size_t k, int i) const { return increments[k * d + (i - 1)]; }
    double area(std::size_t k, int i, int j) const {
        return areas[(k * d + (i - 1)) * d + (j - 1)];
    }

    // Coarsen a fine fBm sample by `stride`; areas are left-point sums over the
    // fine sub-grid. Chen consistency across a few consecutive steps is checked
    // on construction (the sums telescope, so the defect is pure roundoff).
    static RoughDriverGrid from_fbm(const FbmGridSample& fine, std::size_t stride);

    // Smooth test driver with exact increments and quadrature areas.
    static RoughDriverGrid from_smooth(const std::function<double(double, int)>& z,
                                       const std::function<double(double, int)>& zdot,
                                       int d, const std::vector<double>& times);
};

// One-step second-order scheme:
// y += sigma(y) dZ + b(y) dt + sum_{i,j} (Dsigma_j sigma_i)(y) Z2(i,j).
std::vector<double> solve_rough(const VectorFieldSpec& vf, const RoughDriverGrid& drv);

// Classical ODE solve against the absolutely continuous driver X^eps:
// RK4 with sub-steps aligned to the eps^2 blocks (the derivative jumps there).
std::vector<double> solve_ode(const VectorFieldSpec& vf, const DriverPath& path,
                              const std::vector<double>& out_times,
                              int substeps_per_block = 4);

struct EnsemblePair {
    std::vector<double> times;
    int n = 0;
    std::size_t n_samples = 0;
    // sample-major: y[(sample * times.size() + ti) * n + comp]
    std::vector<double> y_eps;
    std::vector<double> y_limit;
    std::size_t failed_eps = 0;
    std::size_t failed_limit = 0;
};

struct EpsEnsembleConfig {
    double epsilon = 0.1;
    NoiseLaw law = NoiseLaw::rademacher();
    std::uint64_t seed = 1;
    int substeps_per_block = 2;
};

struct LimitEnsembleConfig {
    std::size_t fine_steps = 4096;
    std::size_t stride = 8;
    std::uint64_t seed = 2;
};

// Independent Monte Carlo ensembles of y^eps (ODE route) and y (rough route)
// evaluated at the given times; the two seeds drive unrelated streams.
EnsemblePair solve_eps_vs_limit(const VectorFieldSpec& vf, HurstParam h,
                                const EpsEnsembleConfig& eps_cfg,
                                const LimitEnsembleConfig& lim_cfg,
                                const std::vector<double>& times, std::size_t n_samples);

// Built-in vector fields used by the verification suites and the CLI presets.
VectorFieldSpec vf_zero_sigma_exp_drift();           // n=d=1, sigma=0, b(y)=-y
VectorFieldSpec vf_scalar_linear(double a0 = 1.0);   // n=d=1, sigma(y)=y, b=0
VectorFieldSpec vf_constant_sigma(int n, int d, const std::vector<double>& S);
VectorFieldSpec vf_noncommuting_2d();                // n=d=2, sigma=[[1,0],[0,sin y1]]

} // namespace rsde
