#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace camokit {

struct GradCheckResult {
    std::string suite;
    std::size_t trials = 0;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Central-difference verification of every analytic backward pass (adapter
/// MLP, SF-GLU gate with the target patch held fixed, GLU, SwiGLU). Each
/// trial draws a fresh random instance (adapter at dim 8 / hidden 16, gates
/// on a 4x4x3 feature map) and compares the gradient of a random linear
/// functional of the output against finite differences.
std::vector<GradCheckResult> run_gradient_checks(std::size_t trials,
                                                 std::uint64_t seed,
                                                 double tolerance = 1e-4);

}  // namespace camokit
