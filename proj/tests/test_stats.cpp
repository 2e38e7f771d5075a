#include "doctest.h"

#include <cmath>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/fbm.hpp"
#include "rsde/stats.hpp"

using namespace rsde;

TEST_CASE("holder norm: linear and constant paths, domain checks") {
    const std::size_t N = 1 << 6;
    std::vector<double> lin(N + 1), cst(N + 1, 3.0);
    for (std::size_t m = 0; m <= N; ++m)
        lin[m] = static_cast<double>(m) / N;
    CHECK(holder_norm(lin, 1.0, 1.0).norm == doctest::Approx(1.0));
    CHECK(holder_norm(lin, 1.0, 1.0, true).norm == doctest::Approx(1.0));
    CHECK(holder_norm(cst, 1.0, 0.5).norm == 0.0);
    CHECK_THROWS_AS(holder_norm(lin, 1.0, 0.0), domain_error);
    CHECK_THROWS_AS(holder_norm(lin, 1.0, 1.5), domain_error);
    std::vector<double> tiny(9, 0.0); // depth 3 < 4
    CHECK_THROWS_AS(holder_norm(tiny, 1.0, 0.5), domain_error);
    std::vector<double> notdyadic(10, 0.0);
    CHECK_THROWS_AS(holder_norm(notdyadic, 1.0, 0.5), domain_error);
}

TEST_CASE("holder norm estimate is non-decreasing in depth") {
    const auto h = HurstParam::rough(0.4);
    const std::size_t N = 1 << 12;
    const auto s = simulate_fbm(h, uniform_grid(N), 1, 5, 0);
    double prev = 0.0;
    for (int depth = 8; depth <= 12; ++depth) {
        const std::size_t stride = N >> depth;
        std::vector<double> sub;
        for (std::size_t m = 0; m <= N; m += stride)
            sub.push_back(s.value(m, 1));
        const double norm = holder_norm(sub, 1.0, 0.35).norm;
        CHECK(norm >= prev - 1e-12);
        prev = norm;
    }
}

TEST_CASE("criticality evidence: supercritical mu keeps growing, subcritical stabilizes") {
    const double H = 0.4;
    const auto h = HurstParam::rough(H);
    const std::size_t N = 1 << 13;
    double grow_hi = 0.0, grow_lo = 0.0;
    const int reps = 6;
    for (int r = 0; r < reps; ++r) {
        const auto s = simulate_fbm(h, uniform_grid(N), 1, 31, static_cast<std::uint32_t>(r));
        auto norm_at_depth = [&](int depth, double mu) {
            const std::size_t stride = N >> depth;
            std::vector<double> sub;
            for (std::size_t m = 0; m <= N; m += stride)
                sub.push_back(s.value(m, 1));
            return holder_norm(sub, 1.0, mu).norm;
        };
        grow_hi += norm_at_depth(13, H + 0.02) / norm_at_depth(11, H + 0.02);
        grow_lo += norm_at_depth(13, H - 0.05) / norm_at_depth(11, H - 0.05);
    }
    grow_hi /= reps;
    grow_lo /= reps;
    CHECK(grow_hi > grow_lo);  // the supercritical exponent grows strictly faster
    CHECK(grow_hi > 1.08);     // still climbing at the finest scales
    CHECK(grow_lo < 1.06);     // subcritical supremum settles early
}

TEST_CASE("holder norm of areas uses the doubled exponent") {
    // A(s,t) = (t - s)^2 has 2mu-norm 1 at mu = 1
    const auto a2 = [](std::size_t s, std::size_t t) {
        const double dt = static_cast<double>(t - s) / 16.0;
        return dt * dt;
    };
    const auto est = holder_norm_2var(a2, 17, 1.0, 1.0);
    CHECK(est.norm == doctest::Approx(1.0));
}

TEST_CASE("energy distance: zero on ties, positive otherwise") {
    std::vector<double> x{0.1, 0.5, -0.3, 2.0, 0.7, -1.1};
    CHECK(energy_distance(x.data(), 6, x.data(), 6, 1) == 0.0);
    CHECK(energy_distance(x.data(), 3, x.data(), 3, 2) == 0.0);
    std::vector<double> y{5.1, 5.5, 4.7, 6.0, 5.7, 4.9};
    CHECK(energy_distance(x.data(), 6, y.data(), 6, 1) > 1.0);
    CHECK_THROWS_AS(energy_distance(x.data(), 0, y.data(), 6, 1), domain_error);
}

TEST_CASE("permutation test: null calibration over 20 repeats") {
    // identical laws: p-values should look uniform; at the 10% level no more
    // than 3 of 20 fixed-seed repeats may fall below 0.1
    int below = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 256;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = normal_at(1234, RngStream::test, rep, 1, static_cast<std::uint32_t>(i));
            y[i] = normal_at(1234, RngStream::test, rep, 2, static_cast<std::uint32_t>(i));
        }
        const auto pt = energy_perm_test(x, n, y, n, 1, 99, 256, 555 + rep);
        if (pt.p_value < 0.1)
            ++below;
    }
    CHECK(below <= 3);
}

TEST_CASE("permutation test flags a genuine location shift") {
    const std::size_t n = 256;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = normal_at(7, RngStream::test, 0, 1, static_cast<std::uint32_t>(i));
        y[i] = 1.5 + normal_at(7, RngStream::test, 0, 2, static_cast<std::uint32_t>(i));
    }
    const auto pt = energy_perm_test(x, n, y, n, 1, 199, 256, 99);
    CHECK(pt.p_value <= 0.01);
}

TEST_CASE("KS statistics: basic behavior and the normal cdf") {
    CHECK(normal_cdf(0.0, 0.0, 1.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.96, 0.0, 1.0) == doctest::Approx(0.975).epsilon(1e-3));
    std::vector<double> a, b;
    for (int i = 0; i < 2000; ++i) {
        a.push_back(normal_at(3, RngStream::test, 1, 1, i));
        b.push_back(normal_at(3, RngStream::test, 1, 2, i));
    }
    const double same = ks_two_sample(a, b);
    CHECK(same < 0.06);
    for (auto& v : b)
        v += 1.0;
    CHECK(ks_two_sample(a, b) > 0.3);
    const double ks1 = ks_vs_cdf(a, [](double x) { return normal_cdf(x, 0.0, 1.0); });
    CHECK(ks1 < 0.04);
}

TEST_CASE("drop_nan_rows removes exactly the contaminated rows") {
    std::vector<double> rows{1.0, 2.0, std::nan(""), 3.0, 4.0, 5.0};
    std::size_t kept = 0;
    const auto clean = drop_nan_rows(rows, 2, &kept);
    CHECK(kept == 2);
    CHECK(clean == std::vector<double>{1.0, 2.0, 4.0, 5.0});
}

TEST_CASE("fdd: diagonal area coordinate is a deterministic function of the value") {
    // X2(0,1)(i,i) equals (1/2) X_1^2 by construction, so the transformed
    // coordinates must have KS distance ~ 0 against each other
    const RandomWalkNoise base(0.3, NoiseLaw::rademacher(), 1, 41);
    FddConfig cfg;
    cfg.times = {1.0};
    cfg.pairs = {{0.0, 1.0}};
    cfg.n_samples = 400;
    cfg.fbm_steps = 256;
    cfg.n_permutations = 0;
    const auto res = fdd_test(base, HurstParam::rough(0.4), cfg);
    CHECK(res.dim == 2);
    std::vector<double> half_sq(cfg.n_samples), diag(cfg.n_samples);
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        half_sq[s] = 0.5 * res.eps_rows[s * 2] * res.eps_rows[s * 2];
        diag[s] = res.eps_rows[s * 2 + 1];
    }
    CHECK(ks_two_sample(half_sq, diag) < 0.01);
    CHECK(res.energy.statistic >= 0.0);
}

TEST_CASE("study trend bookkeeping") {
    ConvergenceStudy st;
    for (int rep = 0; rep < 3; ++rep)
        for (double eps : {0.3, 0.2, 0.1}) {
            StudyCell c;
            c.eps = eps;
            c.statistic = "energy";
            c.replicate = rep;
            c.value = (rep == 2) ? eps * eps : eps; // all replicates decrease
            st.cells.push_back(c);
        }
    CHECK(st.replicate_count("energy") == 3);
    CHECK(st.replicates_decreasing("energy") == 3);
    CHECK(ConvergenceStudy::decreasing({3.0, 2.0, 1.0}));
    CHECK(!ConvergenceStudy::decreasing({3.0, 3.0, 1.0}));
    CHECK(!ConvergenceStudy::decreasing({1.0}));
}
