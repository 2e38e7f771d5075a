#pragma once

#include <cmath>
#include <cstddef>
#include <string>

// Data-parallel inner loops used by the hot paths: power-kernel evaluation,
// dot products, moment power sums, pairwise-distance sums. Every kernel has
// a scalar reference implementation and an AVX2 variant; the active backend
// is picked at runtime (cpuid, overridable) and the two are equivalence-tested.
namespace rsde::kernels {

enum class Backend { scalar, avx2 };

// Active backend. Defaults to the best the CPU supports; RSDE_KERNEL=scalar|avx2
// in the environment or force() override it.
Backend active();
void force(Backend b);
void reset_to_auto();
bool cpu_has_avx2();
std::string backend_name();
Backend backend_from_name(const std::string& name); // "auto" maps to best available

// out[i] = x[i]^p for strictly positive finite x[i]; non-positive entries fall
// back to std::pow semantics.
void vpow(const double* x, double* out, std::size_t n, double p);

double dot(const double* a, const double* b, std::size_t n);

// Compensated (Neumaier) accumulator; merge order is fixed by the callers so
// results do not depend on the thread count.
struct Accum {
    double sum = 0.0;
    double comp = 0.0;
    inline void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    inline void merge(const Accum& o) {
        add(o.sum);
        comp += o.comp;
    }
    inline double value() const { return sum + comp; }
};

// sums[j-1] += sum_i x[i]^j for j = 1..pmax, compensated.
void power_sums(const double* x, std::size_t n, int pmax, Accum* sums);

// Sum of Euclidean distances between all rows of a (na x dim) and b (nb x dim).
double energy_cross_sum(const double* a, std::size_t na, const double* b,
                        std::size_t nb, std::size_t dim);

namespace detail {
struct Vtable {
    void (*vpow)(const double*, double*, std::size_t, double);
    double (*dot)(const double*, const double*, std::size_t);
    void (*power_sums)(const double*, std::size_t, int, Accum*);
    double (*energy_cross_sum)(const double*, std::size_t, const double*, std::size_t,
                               std::size_t);
};
extern const Vtable scalar_vtable;
extern const Vtable avx2_vtable;
} // namespace detail

} // namespace rsde::kernels
