#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rsde/driver.hpp"

namespace rsde {

// Gaussian Volterra path on a grid, sampled from one shared Wiener stream per
// component. Kernel cell integrals are exact, so the only discretization is
// the piecewise projection of dW.
struct FbmGridSample {
    std::vector<double> times; // t_0 = 0 < ... < t_N
    int d = 0;
    std::vector<double> values;       // (N+1) x d row-major, values[0..d-1] = 0
    std::vector<double> dW;           // N x d row-major
    std::vector<double> marginal_var; // exact per-time variance of the scheme
    HurstParam h = HurstParam::classical_brownian();
    std::uint64_t seed = 0;
    std::uint32_t replica = 0;

    std::size_t steps() const { return times.size() - 1; }
    double value(std::size_t m, int component) const {
        return values[m * d + (component - 1)];
    }
};

FbmGridSample simulate_fbm(HurstParam h, const std::vector<double>& times, int d,
                           std::uint64_t seed, std::uint32_t replica = 0);

// Levy areas over grid-aligned pairs, built from the same realization:
// off-diagonal entries are left-point (Ito) Riemann-Stieltjes sums, diagonal
// entries are (1/2) (delta B)^2 exactly.
struct FbmAreaSample {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    int d = 0;
    std::vector<double> values; // pairs.size() x d x d

    double entry(std::size_t pair_idx, int i, int j) const {
        return values[(pair_idx * d + (i - 1)) * d + (j - 1)];
    }
};

FbmAreaSample simulate_area(const FbmGridSample& sample,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

// E[B_s B_t] for one component: the overlap integral of the two kernels.
double fbm_covariance(HurstParam h, double s, double t);

// Marginals of the uniform-grid scheme at selected grid indices, for many
// replicas at once: rows are replicas, columns run over (index, component).
// Skips the full-path construction, so large ensembles stay cheap.
std::vector<double> fbm_marginals(HurstParam h, std::size_t n_steps,
                                  const std::vector<std::size_t>& indices, int d,
                                  std::uint64_t seed, std::size_t replicas,
                                  double horizon = 1.0);

// Uniform grid 0, T/n, ..., T.
std::vector<double> uniform_grid(std::size_t n, double horizon = 1.0);

} // namespace rsde
