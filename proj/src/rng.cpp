#include "camokit/rng.hpp"

#include <cmath>
#include <numbers>

namespace camokit {

namespace {

// splitmix64 finalizer: a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng CounterRng::for_stream(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t substream) {
    CounterRng rng;
    rng.key_ = mix64(mix64(mix64(seed) ^ stream) ^ substream);
    return rng;
}

std::uint64_t CounterRng::next_u64() {
    return mix64(key_ + counter_++ * 0xD1342543DE82EF95ULL);
}

double CounterRng::next_double() {
    // 53 high bits -> [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double CounterRng::next_gaussian() {
    if (has_cached_gaussian_) {
        has_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    double u1 = next_double();
    const double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_gaussian_ = r * std::sin(theta);
    has_cached_gaussian_ = true;
    return r * std::cos(theta);
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

Vector CounterRng::unit_vector(std::size_t dim) {
    Vector v = gaussian_vector(dim, 1.0);
    return vec::normalized(v);
}

Vector CounterRng::gaussian_vector(std::size_t dim, double stddev) {
    Vector v(dim);
    for (double& x : v) x = stddev * next_gaussian();
    return v;
}

}  // namespace camokit
