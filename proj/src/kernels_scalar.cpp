#include "rsde/kernels.hpp"

#include <cmath>

namespace rsde::kernels {
namespace {

void vpow_scalar(const double* x, double* out, std::size_t n, double p) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::pow(x[i], p);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    // Four independent accumulators; same shape as the AVX2 horizontal merge.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i)
        tail += a[i] * b[i];
    return ((s0 + s2) + (s1 + s3)) + tail;
}

void power_sums_scalar(const double* x, std::size_t n, int pmax, Accum* sums) {
    for (std::size_t i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j < pmax; ++j) {
            p *= x[i];
            sums[j].add(p);
        }
    }
}

double energy_cross_sum_scalar(const double* a, std::size_t na, const double* b,
                               std::size_t nb, std::size_t dim) {
    Accum rows;
    for (std::size_t i = 0; i < na; ++i) {
        const double* ai = a + i * dim;
        double row = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* bj = b + j * dim;
            double d2 = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = ai[c] - bj[c];
                d2 += d * d;
            }
            row += std::sqrt(d2);
        }
        rows.add(row);
    }
    return rows.value();
}

} // namespace

namespace detail {
const Vtable scalar_vtable = {vpow_scalar, dot_scalar, power_sums_scalar,
                              energy_cross_sum_scalar};
} // namespace detail

} // namespace rsde::kernels
