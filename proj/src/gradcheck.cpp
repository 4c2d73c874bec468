#include "camokit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "camokit/rng.hpp"
#include "camokit/sfglu.hpp"
#include "camokit/textfusion.hpp"

namespace camokit {

namespace {

constexpr std::size_t kDim = 8;
constexpr std::size_t kHidden = 16;
constexpr std::size_t kHeight = 4;
constexpr std::size_t kWidth = 4;
constexpr std::size_t kChannels = 3;

double rel_err(double analytic, double fd) {
    return std::abs(analytic - fd) /
           (std::max(std::abs(analytic), std::abs(fd)) + 1e-6);
}

// Central difference of a scalar callable in one shared slot.
template <typename F>
double central(F&& f, double* slot, double h = 1e-5) {
    const double orig = *slot;
    *slot = orig + h;
    const double up = f();
    *slot = orig - h;
    const double down = f();
    *slot = orig;
    return (up - down) / (2.0 * h);
}

double adapter_trial(CounterRng& rng) {
    AdapterParams params = AdapterParams::random(kDim, kHidden, rng);
    Vector input = rng.gaussian_vector(kDim, 1.0);
    const Vector g = rng.gaussian_vector(kDim, 1.0);

    const auto loss = [&]() { return dot(adapter_forward(params, input), g); };
    const AdapterGradients grads = adapter_backward(params, input, g);

    double worst = 0.0;
    const auto check_matrix = [&](Matrix& m, const Matrix& analytic) {
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            worst = std::max(worst,
                             rel_err(analytic.data[i], central(loss, &m.data[i])));
        }
    };
    const auto check_vector = [&](Vector& v, const Vector& analytic) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            worst = std::max(worst, rel_err(analytic[i], central(loss, &v[i])));
        }
    };
    check_matrix(params.w1, grads.w1);
    check_vector(params.b1, grads.b1);
    check_matrix(params.w2, grads.w2);
    check_vector(params.b2, grads.b2);
    check_matrix(params.w3, grads.w3);
    check_vector(params.b3, grads.b3);
    check_vector(input, grads.input);
    return worst;
}

FeatureMap random_map(CounterRng& rng) {
    FeatureMap z(kHeight, kWidth, kChannels);
    for (double& v : z.data) v = rng.next_gaussian();
    return z;
}

FeatureMap random_grad(CounterRng& rng) { return random_map(rng); }

double map_loss(const FeatureMap& out, const FeatureMap& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.data.size(); ++i) s += out.data[i] * g.data[i];
    return s;
}

double sfglu_trial(CounterRng& rng) {
    FeatureMap z = random_map(rng);
    SimilarityField s;
    for (std::size_t j = 0; j < kHeight * kWidth; ++j) {
        s.scores.push_back(sigmoid(rng.next_gaussian()));
    }
    const GateConfig cfg;
    const PatchGrid grid = PatchGrid::regular(kHeight, kWidth);
    // The argmax index is data, not a differentiable quantity: d is fixed.
    const Vector d = spatial_distances(grid, target_patch(s), cfg.epsilon);
    GateConvParams conv{rng.gaussian_vector(kChannels, 1.0),
                        rng.gaussian_vector(kChannels, 1.0)};
    const FeatureMap g = random_grad(rng);

    const auto loss = [&]() { return map_loss(sfglu_gate(z, s, d, conv, cfg), g); };
    const SfgluGradients grads = sfglu_gate_backward(z, s, d, conv, cfg, g);

    double worst = 0.0;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        worst = std::max(worst, rel_err(grads.z.data[i], central(loss, &z.data[i])));
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
        worst = std::max(worst,
                         rel_err(grads.conv_weight[c], central(loss, &conv.weight[c])));
        worst = std::max(worst,
                         rel_err(grads.conv_bias[c], central(loss, &conv.bias[c])));
    }
    for (std::size_t j = 0; j < s.scores.size(); ++j) {
        worst = std::max(worst,
                         rel_err(grads.scores[j], central(loss, &s.scores[j])));
    }
    return worst;
}

double glu_trial(CounterRng& rng) {
    FeatureMap z = random_map(rng);
    ChannelAffine params{rng.gaussian_vector(kChannels, 1.0),
                         rng.gaussian_vector(kChannels, 1.0)};
    const FeatureMap g = random_grad(rng);

    const auto loss = [&]() { return map_loss(glu_baseline(z, params), g); };
    const GluGradients grads = glu_backward(z, params, g);

    double worst = 0.0;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        worst = std::max(worst, rel_err(grads.z.data[i], central(loss, &z.data[i])));
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
        worst = std::max(worst, rel_err(grads.weight[c], central(loss, &params.weight[c])));
        worst = std::max(worst, rel_err(grads.bias[c], central(loss, &params.bias[c])));
    }
    return worst;
}

double swiglu_trial(CounterRng& rng) {
    FeatureMap z = random_map(rng);
    SwigluParams params;
    params.value = {rng.gaussian_vector(kChannels, 1.0),
                    rng.gaussian_vector(kChannels, 1.0)};
    params.gate = {rng.gaussian_vector(kChannels, 1.0),
                   rng.gaussian_vector(kChannels, 1.0)};
    const FeatureMap g = random_grad(rng);

    const auto loss = [&]() { return map_loss(swiglu_baseline(z, params), g); };
    const SwigluGradients grads = swiglu_backward(z, params, g);

    double worst = 0.0;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        worst = std::max(worst, rel_err(grads.z.data[i], central(loss, &z.data[i])));
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
        worst = std::max(worst, rel_err(grads.value_weight[c],
                                        central(loss, &params.value.weight[c])));
        worst = std::max(worst, rel_err(grads.value_bias[c],
                                        central(loss, &params.value.bias[c])));
        worst = std::max(worst, rel_err(grads.gate_weight[c],
                                        central(loss, &params.gate.weight[c])));
        worst = std::max(worst, rel_err(grads.gate_bias[c],
                                        central(loss, &params.gate.bias[c])));
    }
    return worst;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(std::size_t trials,
                                                 std::uint64_t seed,
                                                 double tolerance) {
    struct Suite {
        const char* name;
        double (*trial)(CounterRng&);
    };
    const Suite suites[] = {
        {"adapter", adapter_trial},
        {"sfglu", sfglu_trial},
        {"glu", glu_trial},
        {"swiglu", swiglu_trial},
    };

    std::vector<GradCheckResult> results;
    for (const Suite& suite : suites) {
        GradCheckResult r;
        r.suite = suite.name;
        r.trials = trials;
        CounterRng rng = CounterRng::for_stream(seed, 0x6AD5u,
                                                std::hash<std::string>{}(suite.name));
        for (std::size_t t = 0; t < trials; ++t) {
            r.max_rel_error = std::max(r.max_rel_error, suite.trial(rng));
        }
        r.passed = r.max_rel_error <= tolerance;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace camokit
