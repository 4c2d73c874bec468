#pragma once

#include <cstdint>

#include "camokit/numerics.hpp"

namespace camokit {

/// Counter-based generator: the output at step n is a pure function of
/// (key, n), so independent streams can be handed to parallel workers and
/// every stream is reproducible across platforms (no libstdc++ distribution
/// dependence).
class CounterRng {
public:
    static CounterRng for_stream(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t substream = 0);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double next_double();

    /// Uniform in [lo, hi).
    double next_range(double lo, double hi);

    /// Standard normal via Box-Muller (second value cached).
    double next_gaussian();

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    /// Unit-norm vector of i.i.d. gaussians.
    Vector unit_vector(std::size_t dim);

    /// i.i.d. gaussian vector with the given per-coordinate std.
    Vector gaussian_vector(std::size_t dim, double stddev);

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    bool has_cached_gaussian_ = false;
    double cached_gaussian_ = 0.0;
};

}  // namespace camokit
