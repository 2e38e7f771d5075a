#include "doctest.h"

#include <cmath>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/fbm.hpp"
#include "rsde/kernels.hpp"

using namespace rsde;

TEST_CASE("grid validation") {
    const auto h = HurstParam::rough(0.4);
    CHECK_THROWS_AS(simulate_fbm(h, {0.5, 1.0}, 1, 1), domain_error);      // missing t0 = 0
    CHECK_THROWS_AS(simulate_fbm(h, {0.0, 0.5, 0.5}, 1, 1), domain_error); // degenerate
    CHECK_THROWS_AS(simulate_fbm(h, {0.0}, 1, 1), domain_error);
}

TEST_CASE("values start at zero and reproduce per (seed, replica)") {
    const auto h = HurstParam::rough(0.4);
    const auto grid = uniform_grid(64);
    const auto a = simulate_fbm(h, grid, 2, 5, 3);
    const auto b = simulate_fbm(h, grid, 2, 5, 3);
    const auto c = simulate_fbm(h, grid, 2, 5, 4);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    for (int i = 1; i <= 2; ++i)
        CHECK(a.value(0, i) == 0.0);
}

TEST_CASE("exact discretization variance approaches 1/(2H) and samples match it") {
    const double H = 0.4;
    const auto h = HurstParam::rough(H);
    const std::size_t N = 1 << 12;
    const auto grid = uniform_grid(N);
    const auto probe = simulate_fbm(h, grid, 1, 1, 0);
    const double target = 1.0 / (2.0 * H); // = 1.25
    CHECK(std::abs(probe.marginal_var.back() - target) < 0.01 * target);

    // sample variance against the scheme's own exact variance, 4 sigma
    const std::size_t n = 4000;
    kernels::Accum s2, s4;
    for (std::size_t r = 0; r < n; ++r) {
        const auto smp = simulate_fbm(h, uniform_grid(1 << 10), 1, 99,
                                      static_cast<std::uint32_t>(r));
        const double v = smp.value(1 << 10, 1);
        s2.add(v * v);
        s4.add(v * v * v * v);
    }
    const double mean = s2.value() / n;
    const double se = std::sqrt((s4.value() / n - mean * mean) / n);
    const auto probe10 = simulate_fbm(h, uniform_grid(1 << 10), 1, 1, 0);
    CHECK(std::abs(mean - probe10.marginal_var.back()) <= 4.0 * se);
}

TEST_CASE("classical mode gives standard Brownian motion") {
    const auto h = HurstParam::classical_brownian();
    const auto s = simulate_fbm(h, uniform_grid(256), 1, 7, 0);
    CHECK(s.marginal_var.back() == doctest::Approx(1.0).epsilon(1e-9));
    // path equals the cumulative sum of its Wiener increments
    double cum = 0.0;
    for (std::size_t m = 1; m <= 256; ++m) {
        cum += s.dW[m - 1];
        CHECK(s.value(m, 1) == doctest::Approx(cum).epsilon(1e-12));
    }
}

TEST_CASE("components are independent: cross-covariance within 4 sigma of zero") {
    const auto h = HurstParam::rough(0.4);
    const std::size_t n = 4000;
    kernels::Accum cross, c2;
    for (std::size_t r = 0; r < n; ++r) {
        const auto s = simulate_fbm(h, uniform_grid(256), 2, 3, static_cast<std::uint32_t>(r));
        const double v = s.value(256, 1) * s.value(256, 2);
        cross.add(v);
        c2.add(v * v);
    }
    const double mean = cross.value() / n;
    const double se = std::sqrt((c2.value() / n - mean * mean) / n);
    CHECK(std::abs(mean) <= 4.0 * se);
}

TEST_CASE("area: empty pair, diagonal convention, Chen telescoping to 1e-12") {
    const auto h = HurstParam::rough(0.45);
    const auto s = simulate_fbm(h, uniform_grid(512), 2, 11, 0);
    const auto a0 = simulate_area(s, {{17, 17}});
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            CHECK(a0.entry(0, i, j) == 0.0);

    const auto ar = simulate_area(s, {{0, 256}, {0, 128}, {128, 256}});
    for (int i = 1; i <= 2; ++i) {
        const double db = s.value(256, i) - s.value(0, i);
        CHECK(ar.entry(0, i, i) == 0.5 * db * db);
    }
    // Chen: A(s,t) - A(s,u) - A(u,t) has entry (i,j) = dB^j_su * dB^i_ut
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            if (i == j)
                continue;
            const double lhs = ar.entry(0, i, j) - ar.entry(1, i, j) - ar.entry(2, i, j);
            const double rhs = (s.value(128, j) - s.value(0, j)) *
                               (s.value(256, i) - s.value(128, i));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    CHECK_THROWS_AS(simulate_area(s, {{10, 5}}), domain_error);
}

TEST_CASE("antisymmetry defect: mean within 4 sigma of zero at N = 2^12") {
    // A(i,j) + A(j,i) - dB^i dB^j telescopes to minus the discrete bracket,
    // which vanishes in L^2 for independent components
    const auto h = HurstParam::rough(0.4);
    const std::size_t n = 300;
    kernels::Accum d1, d2;
    for (std::size_t r = 0; r < n; ++r) {
        const auto s = simulate_fbm(h, uniform_grid(1 << 12), 2, 17,
                                    static_cast<std::uint32_t>(r));
        const auto a = simulate_area(s, {{0, 1 << 12}});
        const double dbi = s.value(1 << 12, 1);
        const double dbj = s.value(1 << 12, 2);
        const double defect = a.entry(0, 1, 2) + a.entry(0, 2, 1) - dbi * dbj;
        d1.add(defect);
        d2.add(defect * defect);
    }
    const double mean = d1.value() / n;
    const double se = std::sqrt((d2.value() / n - mean * mean) / n);
    CHECK(std::abs(mean) <= 4.0 * se);
    // and the L2 size itself is small at this resolution
    CHECK(std::sqrt(d2.value() / n) < 0.15);
}

TEST_CASE("area self-consistency: L2 difference between N and 2N grids decays") {
    const auto h = HurstParam::rough(0.4);
    double prev = -1.0;
    for (std::size_t N : {256u, 512u, 1024u}) {
        kernels::Accum diff2;
        const std::size_t n = 60;
        for (std::size_t r = 0; r < n; ++r) {
            const auto fine = simulate_fbm(h, uniform_grid(2 * N), 2, 23,
                                           static_cast<std::uint32_t>(r));
            // the coarse path keeps every other node of the fine one
            FbmGridSample coarse;
            coarse.times = uniform_grid(N);
            coarse.d = 2;
            coarse.values.resize((N + 1) * 2);
            for (std::size_t m = 0; m <= N; ++m)
                for (int i = 0; i < 2; ++i)
                    coarse.values[m * 2 + i] = fine.values[2 * m * 2 + i];
            const auto af = simulate_area(fine, {{0, 2 * N}});
            const auto ac = simulate_area(coarse, {{0, N}});
            const double d = af.entry(0, 1, 2) - ac.entry(0, 1, 2);
            diff2.add(d * d);
        }
        const double l2 = std::sqrt(diff2.value() / n);
        if (prev >= 0.0)
            CHECK(l2 < prev); // logged trend, not a sharp rate
        prev = l2;
    }
}

TEST_CASE("covariance closed forms and quadrature") {
    const auto h = HurstParam::rough(0.4);
    CHECK(fbm_covariance(h, 1.0, 1.0) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(fbm_covariance(h, 0.0, 0.7) == 0.0);
    const auto hb = HurstParam::classical_brownian();
    CHECK(fbm_covariance(hb, 0.3, 0.8) == doctest::Approx(0.3));
    CHECK(fbm_covariance(h, 0.4, 0.9) == doctest::Approx(fbm_covariance(h, 0.9, 0.4)));
    // near H = 1/2 the quadrature path approaches s ^ t
    const auto h49 = HurstParam::rough(0.499);
    CHECK(std::abs(fbm_covariance(h49, 0.5, 0.75) - 0.5) < 5e-3);
}

TEST_CASE("empirical covariance matches quadrature") {
    const double H = 0.43;
    const auto h = HurstParam::rough(H);
    const std::size_t N = 1 << 10;
    const auto grid = uniform_grid(N);
    const std::size_t n = 6000;
    const std::size_t idx[2] = {N / 4, (3 * N) / 4};
    kernels::Accum prod, prod2;
    for (std::size_t r = 0; r < n; ++r) {
        const auto s = simulate_fbm(h, grid, 1, 29, static_cast<std::uint32_t>(r));
        const double v = s.value(idx[0], 1) * s.value(idx[1], 1);
        prod.add(v);
        prod2.add(v * v);
    }
    const double mean = prod.value() / n;
    const double se = std::sqrt((prod2.value() / n - mean * mean) / n);
    const double target = fbm_covariance(h, 0.25, 0.75);
    CHECK(std::abs(mean - target) <= 4.0 * se);
}
