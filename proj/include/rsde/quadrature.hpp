#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace rsde {

// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
const std::vector<std::pair<double, double>>& gauss_legendre_rule(int n);

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

// Adaptive Gauss-Kronrod for smooth-ish integrands. Throws accuracy_error if
// the requested relative tolerance is not reached.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* err_estimate = nullptr);

// tanh-sinh for integrands with integrable endpoint singularities.
double singular_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* err_estimate = nullptr);

} // namespace rsde
