#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rsde/kernels.hpp"

using namespace rsde;

namespace {

// run fn under both backends, restore auto afterwards
template <typename F>
void with_backends(F&& fn) {
    kernels::force(kernels::Backend::scalar);
    fn(kernels::Backend::scalar);
    if (kernels::cpu_has_avx2()) {
        kernels::force(kernels::Backend::avx2);
        fn(kernels::Backend::avx2);
    }
    kernels::reset_to_auto();
}

} // namespace

TEST_CASE("vpow matches std::pow to a few ulp over the working range") {
    if (!kernels::cpu_has_avx2())
        return;
    std::mt19937_64 gen(101);
    std::uniform_real_distribution<double> base(1e-6, 4.0);
    std::uniform_real_distribution<double> expo(-2.0, 2.0);
    kernels::force(kernels::Backend::avx2);
    double worst = 0.0;
    std::vector<double> x(64), y(64);
    for (int rep = 0; rep < 500; ++rep) {
        const double p = expo(gen);
        for (auto& v : x)
            v = base(gen);
        kernels::vpow(x.data(), y.data(), x.size(), p);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double ref = std::pow(x[i], p);
            worst = std::max(worst, std::abs(y[i] - ref) / std::abs(ref));
        }
    }
    kernels::reset_to_auto();
    CHECK(worst < 5e-15);
}

TEST_CASE("vpow handles zero bases via std::pow semantics") {
    with_backends([](kernels::Backend) {
        double x[5] = {0.0, 1.0, 2.0, 0.0, 3.0};
        double y[5];
        kernels::vpow(x, y, 5, 0.9);
        CHECK(y[0] == 0.0);
        CHECK(y[3] == 0.0);
        CHECK(y[1] == doctest::Approx(1.0));
        CHECK(y[2] == doctest::Approx(std::pow(2.0, 0.9)));
    });
}

TEST_CASE("scalar and avx2 kernels agree within accumulation tolerance") {
    if (!kernels::cpu_has_avx2())
        return;
    std::mt19937_64 gen(7);
    std::normal_distribution<double> nd(0.0, 1.0);
    const std::size_t n = 4097;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = nd(gen);
        b[i] = nd(gen);
    }

    kernels::force(kernels::Backend::scalar);
    const double dot_s = kernels::dot(a.data(), b.data(), n);
    kernels::Accum ps_s[8];
    kernels::power_sums(a.data(), n, 8, ps_s);
    const double en_s = kernels::energy_cross_sum(a.data(), n / 2, b.data(), n / 2, 2);

    kernels::force(kernels::Backend::avx2);
    const double dot_v = kernels::dot(a.data(), b.data(), n);
    kernels::Accum ps_v[8];
    kernels::power_sums(a.data(), n, 8, ps_v);
    const double en_v = kernels::energy_cross_sum(a.data(), n / 2, b.data(), n / 2, 2);
    kernels::reset_to_auto();

    CHECK(dot_v == doctest::Approx(dot_s).epsilon(1e-13));
    for (int j = 0; j < 8; ++j)
        CHECK(ps_v[j].value() == doctest::Approx(ps_s[j].value()).epsilon(1e-12));
    CHECK(en_v == doctest::Approx(en_s).epsilon(1e-12));
}

TEST_CASE("power_sums agrees with long-double brute force") {
    with_backends([](kernels::Backend) {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> ud(-2.0, 2.0);
        std::vector<double> x(1000);
        for (auto& v : x)
            v = ud(gen);
        kernels::Accum sums[6];
        kernels::power_sums(x.data(), x.size(), 6, sums);
        for (int p = 1; p <= 6; ++p) {
            long double ref = 0.0L;
            for (double v : x)
                ref += std::pow(static_cast<long double>(v), p);
            CHECK(sums[p - 1].value() ==
                  doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
        }
    });
}

TEST_CASE("compensated accumulator survives cancellation") {
    kernels::Accum acc;
    acc.add(1e16);
    for (int i = 0; i < 10; ++i)
        acc.add(1.0);
    acc.add(-1e16);
    CHECK(acc.value() == doctest::Approx(10.0));
}

TEST_CASE("energy_cross_sum brute-force agreement in several dims") {
    with_backends([](kernels::Backend) {
        std::mt19937_64 gen(17);
        std::uniform_real_distribution<double> ud(-1.0, 1.0);
        for (std::size_t dim : {1u, 2u, 3u, 5u}) {
            const std::size_t na = 37, nb = 53;
            std::vector<double> a(na * dim), b(nb * dim);
            for (auto& v : a)
                v = ud(gen);
            for (auto& v : b)
                v = ud(gen);
            double ref = 0.0;
            for (std::size_t i = 0; i < na; ++i)
                for (std::size_t j = 0; j < nb; ++j) {
                    double d2 = 0.0;
                    for (std::size_t c = 0; c < dim; ++c) {
                        const double d = a[i * dim + c] - b[j * dim + c];
                        d2 += d * d;
                    }
                    ref += std::sqrt(d2);
                }
            const double got = kernels::energy_cross_sum(a.data(), na, b.data(), nb, dim);
            CHECK(got == doctest::Approx(ref).epsilon(1e-12));
        }
    });
}
