#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rsde/driver.hpp"
#include "rsde/errors.hpp"

using namespace rsde;

namespace {
DriverPath make_path(double eps, double H, int d = 1, std::uint64_t seed = 21,
                     std::uint32_t replica = 0) {
    const RandomWalkNoise noise(eps, NoiseLaw::rademacher(), d, seed, 1.0, replica);
    return DriverPath(noise, HurstParam::rough(H));
}
} // namespace

TEST_CASE("hurst parameter range is enforced") {
    CHECK_THROWS_AS(HurstParam::rough(0.5), domain_error);
    CHECK_THROWS_AS(HurstParam::rough(1.0 / 3.0), domain_error);
    CHECK_THROWS_AS(HurstParam::rough(0.7), domain_error);
    CHECK(HurstParam::rough(0.4).value() == 0.4);
    CHECK(HurstParam::classical_brownian().classical());
}

TEST_CASE("eval starts at zero and rejects out-of-range times") {
    const auto p = make_path(0.2, 0.4);
    CHECK(p.eval(1, 0.0) == 0.0);
    CHECK_THROWS_AS(p.eval(1, -0.01), domain_error);
    CHECK_THROWS_AS(p.eval(1, 1.01), domain_error);
    CHECK_THROWS_AS(p.eval(2, 0.5), domain_error);
}

TEST_CASE("classical mode reduces to the rescaled random walk at block ends") {
    const double eps = 0.25;
    const RandomWalkNoise noise(eps, NoiseLaw::rademacher(), 1, 31);
    const DriverPath p(noise, HurstParam::classical_brownian());
    double walk = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) {
        walk += noise.sample_eta(1, k);
        const double t = static_cast<double>(k) * eps * eps;
        CHECK(p.eval(1, t) == doctest::Approx(eps * walk).epsilon(1e-12));
    }
}

TEST_CASE("single-block closed form") {
    // eps = 0.5, H = 0.4, t = 0.25: the first block contributes
    // eta_1 * 2 * (0.75^0.9 - 0.5^0.9) / 0.9
    const auto p = make_path(0.5, 0.4, 1, 77);
    const double eta1 = p.noise().sample_eta(1, 1);
    const double expect = eta1 * 2.0 * (std::pow(0.75, 0.9) - std::pow(0.5, 0.9)) / 0.9;
    CHECK(p.eval(1, 0.25) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("eval matches the independent quadrature oracle") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> uh(0.35, 0.49), ut(0.01, 1.0);
    const double eps_pool[] = {0.5, 0.3, 0.1};
    for (int c = 0; c < 25; ++c) {
        const auto p = make_path(eps_pool[c % 3], uh(gen), 1, 100 + c);
        const double t = ut(gen);
        const double got = p.eval(1, t);
        const double ref = test_oracles::eval_by_quadrature(p, 1, t);
        CHECK(got == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("deriv matches the quadrature oracle and the first-block closed form") {
    const auto p = make_path(0.5, 0.4, 1, 13);
    const double eps = 0.5, H = 0.4;
    const double eta1 = p.noise().sample_eta(1, 1);
    const double t = 0.2; // interior of block 1
    const double closed = std::pow(eps, H - 0.5) * eta1 / eps +
                          (eta1 / eps) * (std::pow(t + eps, H - 0.5) - std::pow(eps, H - 0.5));
    CHECK(p.deriv(1, t) == doctest::Approx(closed).epsilon(1e-14));
    CHECK(p.deriv(1, t) ==
          doctest::Approx(test_oracles::deriv_by_quadrature(p, 1, t, 1)).epsilon(1e-10));

    const auto q = make_path(0.3, 0.42, 1, 14);
    const double t2 = 0.77;
    const std::size_t blk = q.noise().block_of(t2);
    CHECK(q.deriv(1, t2) ==
          doctest::Approx(test_oracles::deriv_by_quadrature(q, 1, t2, blk)).epsilon(1e-10));
}

TEST_CASE("deriv central differences converge at order >= 1.9") {
    const auto p = make_path(0.3, 0.4, 1, 3);
    const double t = 0.5 - 0.3 * 0.3 / 2.0; // interior of a block
    const double d = p.deriv(1, t);
    double err_prev = 0.0;
    double order = 0.0;
    int idx = 0;
    for (double h : {1e-4, 1e-5}) {
        const double fd = (p.eval(1, t + h) - p.eval(1, t - h)) / (2.0 * h);
        const double err = std::abs(fd - d);
        if (idx++ > 0)
            order = std::log10(err_prev / err);
        err_prev = err;
    }
    CHECK(order >= 1.9);
}

TEST_CASE("classical mode derivative equals theta") {
    const RandomWalkNoise noise(0.25, NoiseLaw::rademacher(), 1, 9);
    const DriverPath p(noise, HurstParam::classical_brownian());
    for (double t : {0.1, 0.3, 0.55, 0.9})
        CHECK(p.deriv(1, t) == doctest::Approx(noise.theta_at(1, t)).epsilon(1e-15));
}

TEST_CASE("deriv is double-valued at block boundaries with a side flag") {
    const double eps = 0.5;
    const auto p = make_path(eps, 0.4, 1, 6);
    const double t = eps * eps; // boundary between blocks 1 and 2
    const double left = p.deriv(1, t, Side::left);
    const double right = p.deriv(1, t, Side::right);
    const double eta1 = p.noise().sample_eta(1, 1);
    const double eta2 = p.noise().sample_eta(1, 2);
    const double jump = std::pow(eps, 0.4 - 0.5) * (eta2 - eta1) / eps;
    CHECK(right - left == doctest::Approx(jump).epsilon(1e-12));
}

TEST_CASE("additivity: restructured blockwise evaluation matches eval") {
    // Splitting the defining integral at arbitrary interior points and
    // re-evaluating each piece with the same antiderivative must telescope.
    const auto p = make_path(0.3, 0.38, 1, 44);
    const double H = 0.38, eps = 0.3;
    const double t = 0.83;
    for (double split : {0.2, 0.45, 0.7}) {
        double sum = 0.0;
        const auto& noise = p.noise();
        for (std::size_t k = 1; k <= noise.n_blocks(); ++k) {
            double a = noise.block_start(k);
            if (a >= t)
                break;
            const double b = std::min(noise.block_end(k), t);
            for (const auto& [lo, hi] :
                 {std::pair{a, std::min(b, split)}, std::pair{std::max(a, split), b}}) {
                if (lo >= hi)
                    continue;
                sum += noise.sample_eta(1, k) / eps *
                       (std::pow(t + eps - lo, H + 0.5) - std::pow(t + eps - hi, H + 0.5)) /
                       (H + 0.5);
            }
        }
        CHECK(p.eval(1, t) == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("levy area: empty interval, diagonal convention, index convention") {
    const auto p = make_path(0.5, 0.4, 2, 55);
    const auto zero = p.levy_area(0.3, 0.3);
    for (double v : zero.values)
        CHECK(v == 0.0);

    QuadratureSpec quad;
    const auto a = p.levy_area(0.0, 1.0, quad);
    for (int i = 1; i <= 2; ++i) {
        const double dx = p.eval(i, 1.0) - p.eval(i, 0.0);
        CHECK(a.entry(i, i) == doctest::Approx(0.5 * dx * dx).epsilon(1e-9));
    }

    // entry (i,j) integrates component j against dX^i; the Riemann oracle
    // pins the convention
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const double rs = test_oracles::area_by_riemann(p, i, j, 0.0, 1.0, 1 << 20);
            CHECK(a.entry(i, j) == doctest::Approx(rs).epsilon(1e-6));
            if (i != j)
                CHECK(std::abs(a.entry(i, j) - rs) < 1e-6 * std::max(1.0, std::abs(rs)));
        }
    CHECK(a.err_estimate <= quad.abs_tol);
    CHECK_THROWS_AS(p.levy_area(0.6, 0.4), domain_error);
}

TEST_CASE("levy area raises accuracy_error when the tolerance is unreachable") {
    const auto p = make_path(0.3, 0.4, 2, 3);
    QuadratureSpec quad;
    quad.points = 2; // too coarse for the default tolerance
    quad.abs_tol = 1e-16;
    CHECK_THROWS_AS(p.levy_area(0.0, 1.0, quad), accuracy_error);
}

TEST_CASE("chen defect is quadrature noise at degenerate and random triples") {
    const auto p = make_path(0.3, 0.4, 2, 8);
    const auto deg = p.chen_defect(0.2, 0.2, 0.8);
    CHECK(deg.max_norm() <= 1e-9);
    const auto deg2 = p.chen_defect(0.2, 0.8, 0.8);
    CHECK(deg2.max_norm() <= 1e-9);

    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int c = 0; c < 10; ++c) {
        double pts[3] = {ud(gen), ud(gen), ud(gen)};
        std::sort(pts, pts + 3);
        const auto def = p.chen_defect(pts[0], pts[1], pts[2]);
        CHECK(def.max_norm() <= std::max(2.0 * def.quad_err_sum, 1e-8));
    }
    CHECK_THROWS_AS(p.chen_defect(0.5, 0.2, 0.8), domain_error);
}

TEST_CASE("scaling eta by 2 scales eval exactly and the area by 4") {
    const auto p = make_path(0.3, 0.4, 2, 90);
    const auto doubled = p.scaled(2.0);
    for (double t : {0.2, 0.5, 0.9}) {
        CHECK(doubled.eval(1, t) == 2.0 * p.eval(1, t)); // bitwise: power-of-two scaling
        CHECK(doubled.eval(2, t) == 2.0 * p.eval(2, t));
    }
    const auto a1 = p.levy_area(0.1, 0.9);
    const auto a4 = doubled.levy_area(0.1, 0.9);
    for (std::size_t k = 0; k < a1.values.size(); ++k)
        CHECK(a4.values[k] == 4.0 * a1.values[k]);

    const auto scaled17 = p.scaled(1.7);
    for (double t : {0.3, 0.8})
        CHECK(scaled17.eval(1, t) == doctest::Approx(1.7 * p.eval(1, t)).epsilon(1e-13));
}
