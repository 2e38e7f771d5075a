#include "rsde/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace rsde::kernels {
namespace {

std::atomic<const detail::Vtable*> g_vtable{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

bool probe_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void apply(Backend b) {
    g_backend.store(b);
    g_vtable.store(b == Backend::avx2 ? &detail::avx2_vtable : &detail::scalar_vtable);
}

void init_once() {
    if (g_vtable.load() != nullptr)
        return;
    Backend b = probe_avx2() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("RSDE_KERNEL")) {
        const std::string s(env);
        if (s == "scalar")
            b = Backend::scalar;
        else if (s == "avx2" && probe_avx2())
            b = Backend::avx2;
    }
    apply(b);
}

const detail::Vtable& vt() {
    init_once();
    return *g_vtable.load();
}

} // namespace

bool cpu_has_avx2() { return probe_avx2(); }

Backend active() {
    init_once();
    return g_backend.load();
}

void force(Backend b) {
    if (b == Backend::avx2 && !probe_avx2())
        throw std::runtime_error("avx2 kernels requested but the CPU lacks AVX2/FMA");
    apply(b);
}

void reset_to_auto() {
    g_vtable.store(nullptr);
    init_once();
}

std::string backend_name() {
    return active() == Backend::avx2 ? "avx2" : "scalar";
}

Backend backend_from_name(const std::string& name) {
    if (name == "scalar")
        return Backend::scalar;
    if (name == "avx2")
        return Backend::avx2;
    if (name == "auto")
        return probe_avx2() ? Backend::avx2 : Backend::scalar;
    throw std::runtime_error("unknown kernel backend: " + name);
}

void vpow(const double* x, double* out, std::size_t n, double p) {
    vt().vpow(x, out, n, p);
}

double dot(const double* a, const double* b, std::size_t n) {
    return vt().dot(a, b, n);
}

void power_sums(const double* x, std::size_t n, int pmax, Accum* sums) {
    vt().power_sums(x, n, pmax, sums);
}

double energy_cross_sum(const double* a, std::size_t na, const double* b, std::size_t nb,
                        std::size_t dim) {
    return vt().energy_cross_sum(a, na, b, nb, dim);
}

} // namespace rsde::kernels
