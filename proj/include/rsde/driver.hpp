#pragma once

#include <cstddef>
#include <vector>

#include "rsde/noise.hpp"

namespace rsde {

// Hurst parameter in the rough regime (1/3, 1/2), or exactly 1/2 behind an
// explicit classical-Brownian flag used by sanity checks.
class HurstParam {
public:
    static HurstParam rough(double h);
    static HurstParam classical_brownian();

    double value() const { return h_; }
    bool classical() const { return classical_; }

private:
    HurstParam(double h, bool classical) : h_(h), classical_(classical) {}
    double h_;
    bool classical_;
};

struct QuadratureSpec {
    int points = 8;          // Gauss-Legendre points per block-aligned panel
    double abs_tol = 1e-9;   // per-entry absolute tolerance
    bool enforce_tol = true; // throw accuracy_error when the estimate exceeds abs_tol
};

// Level-2 increment over [s,t]. Entry (i,j) integrates component j against
// dX^i: values[(i-1)*d + (j-1)] = int_s^t (X^j_u - X^j_s) dX^i_u.
struct AreaMatrix {
    double s = 0.0;
    double t = 0.0;
    int d = 0;
    std::vector<double> values;
    double err_estimate = 0.0;

    double entry(int i, int j) const { return values[(i - 1) * d + (j - 1)]; }
};

struct ChenDefect {
    int d = 0;
    std::vector<double> values;
    double quad_err_sum = 0.0; // summed per-area error estimates

    double entry(int i, int j) const { return values[(i - 1) * d + (j - 1)]; }
    double max_norm() const;
};

enum class Side { left, right };

// The smoothed step-noise path: X^i(t) integrates the kernel (t+eps-r)^{H-1/2}
// against theta^i. Values and derivatives come from per-block antiderivatives,
// so quadrature error only ever enters through the Levy area.
class DriverPath {
public:
    DriverPath(RandomWalkNoise noise, HurstParam h);

    const RandomWalkNoise& noise() const { return noise_; }
    HurstParam hurst() const { return h_; }
    int dims() const { return noise_.dims(); }
    double horizon() const { return noise_.horizon(); }

    double eval(int component, double t) const;
    void eval_all(double t, double* out) const;

    double deriv(int component, double t, Side side = Side::right) const;
    void deriv_all(double t, double* out, Side side = Side::right) const;

    AreaMatrix levy_area(double s, double t, const QuadratureSpec& q = {}) const;
    ChenDefect chen_defect(double s, double u, double t, const QuadratureSpec& q = {}) const;

    // Path with every eta multiplied by c (the level-1/level-2 scaling hook).
    DriverPath scaled(double c) const;

    const std::vector<double>& eta(int component) const { return eta_[component - 1]; }

    // Derivative with the step value pinned to `block`; used by integrators
    // whose sub-steps never straddle a block boundary.
    double deriv_in_block(int component, double t, std::size_t block) const;
    void deriv_all_in_block(double t, std::size_t block, double* out) const;

private:
    // Number of blocks meeting [0, t], and the clipped end of the last one.
    std::size_t covering_blocks(double t, double* last_end) const;
    void kernel_increments(double t, double exponent, std::size_t K, double last_end,
                           std::vector<double>& scratch) const;

    RandomWalkNoise noise_;
    HurstParam h_;
    std::vector<std::vector<double>> eta_; // [component-1][block-1]
};

} // namespace rsde
