#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace camokit {

/// Raised when an input violates a documented precondition (shape, range, format).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an input is structurally valid but numerically unusable
/// (zero-norm vector, empty mask, zero-area box, all rows degenerate).
class DegenerateInputError : public std::runtime_error {
public:
    explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised for file/parse problems; carries enough context to point at the offender.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double sigmoid(double x) {
    // Split on sign so exp() never overflows.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double sigmoid_deriv(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

inline double swish(double x) { return x * sigmoid(x); }

inline double swish_deriv(double x) {
    const double s = sigmoid(x);
    return s + x * s * (1.0 - s);
}

/// Order-independent reduction: recursive pairwise summation keeps the result
/// identical no matter how a parallel caller splits the range.
double pairwise_sum(std::span<const double> values);

bool all_finite(std::span<const double> values);

}  // namespace camokit
