#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rsde/errors.hpp"
#include "rsde/solver.hpp"

using namespace rsde;

namespace {

DriverPath make_path(double eps, double H, int d = 1, std::uint64_t seed = 21) {
    const RandomWalkNoise noise(eps, NoiseLaw::rademacher(), d, seed);
    return DriverPath(noise, HurstParam::rough(H));
}

} // namespace

TEST_CASE("dsigma matches finite differences of sigma at random points") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> ud(-2.0, 2.0);
    for (const auto& vf : {vf_noncommuting_2d(), vf_scalar_linear()}) {
        const int n = vf.n, d = vf.d;
        std::vector<double> y(n), sp(n * d), sm(n * d), ds(n * d * n);
        const double h = 1e-6;
        for (int rep = 0; rep < 20; ++rep) {
            for (auto& v : y)
                v = ud(gen);
            vf.dsigma(y.data(), ds.data());
            for (int c = 0; c < n; ++c) {
                y[c] += h;
                vf.sigma(y.data(), sp.data());
                y[c] -= 2.0 * h;
                vf.sigma(y.data(), sm.data());
                y[c] += h;
                for (int a = 0; a < n; ++a)
                    for (int i = 0; i < d; ++i) {
                        const double fd = (sp[a * d + i] - sm[a * d + i]) / (2.0 * h);
                        CHECK(ds[(a * d + i) * n + c] == doctest::Approx(fd).epsilon(1e-5));
                    }
            }
        }
    }
}

TEST_CASE("ode route: sigma = 0 gives the exponential-decay drift solution") {
    const auto vf = vf_zero_sigma_exp_drift();
    const auto p = make_path(0.3, 0.4);
    const auto y = solve_ode(vf, p, {0.5, 1.0}, 4);
    CHECK(y[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
    CHECK(y[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("ode route: scalar linear equation solves to a * exp(X_t)") {
    for (double eps : {0.3, 0.1}) {
        const auto p = make_path(eps, 0.4, 1, 17);
        const auto vf = vf_scalar_linear(1.0);
        const auto y = solve_ode(vf, p, {0.25, 0.5, 1.0}, 4);
        const double times[3] = {0.25, 0.5, 1.0};
        for (int k = 0; k < 3; ++k)
            CHECK(y[k] == doctest::Approx(std::exp(p.eval(1, times[k]))).epsilon(1e-6));
    }
}

TEST_CASE("ode route self-convergence order sits in [3.5, 4.5]") {
    // smooth bounded field so the only error source is the integrator
    VectorFieldSpec vf;
    vf.n = vf.d = 1;
    vf.a = {0.4};
    vf.sigma = [](const double* y, double* s) { s[0] = 1.0 + 0.5 * std::cos(y[0]); };
    vf.dsigma = [](const double* y, double* ds) { ds[0] = -0.5 * std::sin(y[0]); };
    vf.drift = [](const double* y, double* b) { b[0] = 0.3 * std::cos(y[0]); };
    const auto p = make_path(0.45, 0.4, 1, 23); // wide blocks make substeps matter
    const double ref = solve_ode(vf, p, {1.0}, 64)[0];
    const double e1 = std::abs(solve_ode(vf, p, {1.0}, 1)[0] - ref);
    const double e2 = std::abs(solve_ode(vf, p, {1.0}, 2)[0] - ref);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.5);
    CHECK(order <= 4.5);
}

TEST_CASE("ode route: fixed realization, output converges as the step shrinks") {
    const auto p = make_path(0.3, 0.38, 1, 5);
    const auto vf = vf_scalar_linear(1.0);
    const double ref = solve_ode(vf, p, {1.0}, 32)[0];
    double prev = 1e300;
    for (int sub : {1, 2, 4, 8}) {
        const double err = std::abs(solve_ode(vf, p, {1.0}, sub)[0] - ref);
        CHECK((err < prev || err < 1e-14));
        prev = err;
    }
}

TEST_CASE("divergence guard reports the failing step") {
    VectorFieldSpec vf;
    vf.n = vf.d = 1;
    vf.a = {10.0};
    vf.sigma = [](const double*, double* s) { s[0] = 0.0; };
    vf.dsigma = [](const double*, double* ds) { ds[0] = 0.0; };
    vf.drift = [](const double* y, double* b) { b[0] = y[0] * y[0]; };
    const auto p = make_path(0.3, 0.4);
    CHECK_THROWS_AS(solve_ode(vf, p, {1.0}, 4), divergence_error);
}

TEST_CASE("rough route: constant sigma is affine-exact") {
    const auto vf = vf_constant_sigma(2, 2, {1.0, 0.5, -0.25, 2.0});
    const auto fine = simulate_fbm(HurstParam::rough(0.4), uniform_grid(512), 2, 31, 0);
    const auto drv = RoughDriverGrid::from_fbm(fine, 4);
    const auto y = solve_rough(vf, drv);
    const std::size_t N = drv.steps();
    // y_t = a + S Z_t exactly: the area term carries Dsigma = 0
    double z1 = 0.0, z2 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        z1 += drv.increment(k, 1);
        z2 += drv.increment(k, 2);
    }
    CHECK(y[N * 2 + 0] == doctest::Approx(1.0 * z1 + 0.5 * z2).epsilon(1e-12));
    CHECK(y[N * 2 + 1] == doctest::Approx(-0.25 * z1 + 2.0 * z2).epsilon(1e-12));
}

TEST_CASE("rough route: sigma = 0 reduces to the drift ODE") {
    auto vf = vf_zero_sigma_exp_drift();
    vf.drift = [](const double* y, double* b) { b[0] = y[0]; }; // y' = y
    const auto drv = RoughDriverGrid::from_smooth(
        [](double, int) { return 0.0; }, [](double, int) { return 0.0; }, 1,
        uniform_grid(1 << 10));
    const auto y = solve_rough(vf, drv);
    // first-order Euler in the drift: order-1 accuracy is all the scheme owes
    CHECK(y[1 << 10] == doctest::Approx(std::exp(1.0)).epsilon(2e-3));
}

TEST_CASE("rough route: geometric smooth driver reproduces the exponential") {
    const auto z = [](double t, int) { return std::sin(t); };
    const auto zd = [](double t, int) { return std::cos(t); };
    const auto drv = RoughDriverGrid::from_smooth(z, zd, 1, uniform_grid(1 << 12));
    const auto vf = vf_scalar_linear(0.7);
    const auto y = solve_rough(vf, drv);
    CHECK(std::abs(y[1 << 12] - 0.7 * std::exp(std::sin(1.0))) <
          1e-4 * 0.7 * std::exp(std::sin(1.0)));
}

TEST_CASE("rough and fine ODE solves agree for the smooth 2-d driver") {
    const auto z = [](double t, int) { return std::sin(t); };
    const auto zd = [](double t, int) { return std::cos(t); };
    const auto vf = vf_noncommuting_2d();
    const auto drv = RoughDriverGrid::from_smooth(z, zd, 2, uniform_grid(1 << 12));
    const auto yr = solve_rough(vf, drv);

    // classical RK4 on y' = sigma(y) zdot(t), very fine steps
    std::vector<double> y = vf.a;
    std::vector<double> sig(4), k1(2), k2(2), k3(2), k4(2), tmp(2);
    auto rhs = [&](const std::vector<double>& yy, double t, std::vector<double>& out) {
        vf.sigma(yy.data(), sig.data());
        for (int a = 0; a < 2; ++a)
            out[a] = (sig[a * 2 + 0] + sig[a * 2 + 1]) * zd(t, 1);
    };
    const std::size_t M = 1 << 15;
    const double h = 1.0 / M;
    for (std::size_t s = 0; s < M; ++s) {
        const double t = s * h;
        rhs(y, t, k1);
        tmp = {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]};
        rhs(tmp, t + 0.5 * h, k2);
        tmp = {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]};
        rhs(tmp, t + 0.5 * h, k3);
        tmp = {y[0] + h * k3[0], y[1] + h * k3[1]};
        rhs(tmp, t + h, k4);
        for (int a = 0; a < 2; ++a)
            y[a] += h / 6.0 * (k1[a] + 2.0 * (k2[a] + k3[a]) + k4[a]);
    }
    const std::size_t N = 1 << 12;
    CHECK(std::abs(yr[N * 2 + 0] - y[0]) < 1e-5);
    CHECK(std::abs(yr[N * 2 + 1] - y[1]) < 1e-5);
}

TEST_CASE("from_fbm grid carries consistent increments and diagonal areas") {
    const auto fine = simulate_fbm(HurstParam::rough(0.42), uniform_grid(256), 2, 77, 1);
    const auto g = RoughDriverGrid::from_fbm(fine, 8);
    CHECK(g.steps() == 32);
    for (std::size_t k = 0; k < g.steps(); ++k)
        for (int i = 1; i <= 2; ++i) {
            const double expect =
                fine.values[(k + 1) * 8 * 2 + (i - 1)] - fine.values[k * 8 * 2 + (i - 1)];
            CHECK(g.increment(k, i) == doctest::Approx(expect));
            CHECK(g.area(k, i, i) ==
                  doctest::Approx(0.5 * expect * expect).epsilon(1e-12));
        }
    CHECK_THROWS_AS(RoughDriverGrid::from_fbm(fine, 7), domain_error);
}

TEST_CASE("eps-vs-limit ensembles: sigma = 0 collapses both laws to a point") {
    const auto vf = vf_zero_sigma_exp_drift();
    EpsEnsembleConfig ec;
    ec.epsilon = 0.3;
    LimitEnsembleConfig lc;
    lc.fine_steps = 256;
    lc.stride = 8;
    const auto pair = solve_eps_vs_limit(vf, HurstParam::rough(0.4), ec, lc, {1.0}, 16);
    for (std::size_t s = 0; s < 16; ++s) {
        CHECK(pair.y_eps[s] == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
        // drift-only rough solve is Euler in dt: first-order accurate
        CHECK(pair.y_limit[s] == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
        CHECK(pair.y_limit[s] == pair.y_limit[0]);
    }
}
