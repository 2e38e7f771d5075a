#include "rsde/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <map>
#include <mutex>

#include "rsde/errors.hpp"

namespace rsde {

namespace {

// Newton iteration on the Legendre recurrence; exploits root symmetry.
std::vector<std::pair<double, double>> build_rule(int n) {
    std::vector<std::pair<double, double>> rule(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = {-x, w};
        rule[n - 1 - i] = {x, w};
    }
    if (n % 2 == 1)
        rule[half - 1].first = 0.0;
    return rule;
}

} // namespace

const std::vector<std::pair<double, double>>& gauss_legendre_rule(int n) {
    static std::map<int, std::vector<std::pair<double, double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& rule = gauss_legendre_rule(n);
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double s = 0.0;
    for (const auto& [x, w] : rule)
        s += w * f(mid + hw * x);
    return s * hw;
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* err_estimate) {
    if (a == b) {
        if (err_estimate)
            *err_estimate = 0.0;
        return 0.0;
    }
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 18, rel_tol, &err);
    if (err_estimate)
        *err_estimate = err;
    const double scale = std::max(std::abs(v), 1e-300);
    if (err / scale > std::max(rel_tol * 32.0, 1e-13))
        throw accuracy_error("adaptive quadrature did not converge", err / scale, rel_tol);
    return v;
}

double singular_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* err_estimate) {
    if (a == b) {
        if (err_estimate)
            *err_estimate = 0.0;
        return 0.0;
    }
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0, l1 = 0.0;
    const double v = integrator.integrate(f, a, b, rel_tol, &err, &l1);
    if (err_estimate)
        *err_estimate = err;
    if (err > std::max(rel_tol * 32.0, 1e-13))
        throw accuracy_error("tanh-sinh quadrature did not converge", err, rel_tol);
    return v;
}

} // namespace rsde
