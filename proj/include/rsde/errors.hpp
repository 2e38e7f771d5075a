#pragma once

#include <stdexcept>
#include <string>

namespace rsde {

// Precondition violations: indices out of range, times outside [0,T], bad laws.
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// A numerical routine could not reach its requested tolerance.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double estimate, double tolerance)
        : std::runtime_error(what), estimate(estimate), tolerance(tolerance) {}
    double estimate;
    double tolerance;
};

// A trajectory left the admissible region (state norm overflow).
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, std::size_t step)
        : std::runtime_error(what), step(step) {}
    std::size_t step;
};

} // namespace rsde
