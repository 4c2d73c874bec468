#include "camokit/sfglu.hpp"

#include <algorithm>
#include <cmath>

namespace camokit {

namespace {

// The gate contract keeps every gain strictly inside (1, 1+alpha). A raw
// sigmoid saturates to exactly 0/1 in double precision once |x| ~ 40, so the
// gate drive is pinned to the open interval.
constexpr double kGateSigmoidFloor = 1e-12;

double gate_sigmoid(double x) {
    return std::clamp(sigmoid(x), kGateSigmoidFloor, 1.0 - kGateSigmoidFloor);
}

void check_shapes(const FeatureMap& z, const SimilarityField& s,
                  std::span<const double> d, const GateConvParams& conv,
                  const GateConfig& cfg) {
    if (z.height < 1 || z.width < 1 || z.channels < 1) {
        throw ValidationError("sfglu: empty feature map");
    }
    if (s.scores.size() != z.patches() || d.size() != z.patches()) {
        throw ValidationError("sfglu: similarity/distance length != patch count");
    }
    if (conv.weight.size() != z.channels || conv.bias.size() != z.channels) {
        throw ValidationError("sfglu: conv params != channel count");
    }
    if (!(cfg.temperature > 0.0) || !(cfg.alpha > 0.0) || !(cfg.epsilon > 0.0)) {
        throw ValidationError("sfglu: config values must be positive");
    }
}

void check_affine(const FeatureMap& z, const ChannelAffine& params,
                  const char* what) {
    if (params.weight.size() != z.channels || params.bias.size() != z.channels) {
        throw ValidationError(std::string(what) + ": params != channel count");
    }
}

}  // namespace

SimilarityField region_scores(std::span<const FusedClassEmbedding> fused,
                              const EmbeddingField& field) {
    if (fused.empty()) {
        throw ValidationError("region_scores: no class embeddings");
    }
    SimilarityField s;
    s.scores.reserve(field.embeddings.size());
    for (const Vector& v : field.embeddings) {
        double best = -std::numeric_limits<double>::infinity();
        for (const FusedClassEmbedding& f : fused) {
            best = std::max(best, dot(f.vector, v));
        }
        s.scores.push_back(sigmoid(best));
    }
    return s;
}

std::size_t target_patch(const SimilarityField& s) {
    if (s.scores.empty()) throw ValidationError("target_patch: empty field");
    std::size_t best = 0;
    for (std::size_t j = 1; j < s.scores.size(); ++j) {
        if (s.scores[j] > s.scores[best]) best = j;
    }
    return best;
}

PatchGrid PatchGrid::regular(std::size_t height, std::size_t width) {
    if (height < 1 || width < 1) throw ValidationError("patch grid: empty");
    PatchGrid grid;
    grid.coords.reserve(height * width);
    for (std::size_t row = 0; row < height; ++row) {
        for (std::size_t col = 0; col < width; ++col) {
            grid.coords.push_back({(static_cast<double>(col) + 0.5) / width,
                                   (static_cast<double>(row) + 0.5) / height});
        }
    }
    return grid;
}

Vector spatial_distances(const PatchGrid& grid, std::size_t target, double eps) {
    if (target >= grid.coords.size()) {
        throw ValidationError("spatial_distances: target index out of range");
    }
    if (!(eps > 0.0)) throw ValidationError("spatial_distances: eps must be > 0");
    const auto& pt = grid.coords[target];
    Vector d(grid.coords.size());
    for (std::size_t j = 0; j < grid.coords.size(); ++j) {
        const double dx = grid.coords[j][0] - pt[0];
        const double dy = grid.coords[j][1] - pt[1];
        d[j] = std::max(std::sqrt(dx * dx + dy * dy), eps);
    }
    return d;
}

FeatureMap sfglu_gate(const FeatureMap& z, const SimilarityField& s,
                      std::span<const double> d, const GateConvParams& conv,
                      const GateConfig& cfg) {
    check_shapes(z, s, d, conv, cfg);
    FeatureMap out(z.height, z.width, z.channels);
    for (std::size_t j = 0; j < z.patches(); ++j) {
        const double u = s.scores[j] / (cfg.temperature * d[j]);
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double gain =
                1.0 + cfg.alpha * gate_sigmoid(conv.weight[c] * u + conv.bias[c]);
            out.at(j, c) = z.at(j, c) * gain;
        }
    }
    return out;
}

SfgluGradients sfglu_gate_backward(const FeatureMap& z, const SimilarityField& s,
                                   std::span<const double> d,
                                   const GateConvParams& conv,
                                   const GateConfig& cfg,
                                   const FeatureMap& grad_out) {
    check_shapes(z, s, d, conv, cfg);
    if (grad_out.data.size() != z.data.size()) {
        throw ValidationError("sfglu_gate_backward: grad shape mismatch");
    }
    SfgluGradients g;
    g.z = FeatureMap(z.height, z.width, z.channels);
    g.conv_weight.assign(z.channels, 0.0);
    g.conv_bias.assign(z.channels, 0.0);
    g.scores.assign(z.patches(), 0.0);
    for (std::size_t j = 0; j < z.patches(); ++j) {
        const double inv_rd = 1.0 / (cfg.temperature * d[j]);
        const double u = s.scores[j] * inv_rd;
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double a = conv.weight[c] * u + conv.bias[c];
            const double gain = 1.0 + cfg.alpha * gate_sigmoid(a);
            const double go = grad_out.at(j, c);
            g.z.at(j, c) = go * gain;
            const double da = go * z.at(j, c) * cfg.alpha * sigmoid_deriv(a);
            g.conv_weight[c] += da * u;
            g.conv_bias[c] += da;
            g.scores[j] += da * conv.weight[c] * inv_rd;
        }
    }
    return g;
}

FeatureMap glu_baseline(const FeatureMap& z, const ChannelAffine& params) {
    check_affine(z, params, "glu");
    FeatureMap out(z.height, z.width, z.channels);
    for (std::size_t j = 0; j < z.patches(); ++j) {
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double x = z.at(j, c);
            out.at(j, c) = x * sigmoid(params.weight[c] * x + params.bias[c]);
        }
    }
    return out;
}

GluGradients glu_backward(const FeatureMap& z, const ChannelAffine& params,
                          const FeatureMap& grad_out) {
    check_affine(z, params, "glu_backward");
    if (grad_out.data.size() != z.data.size()) {
        throw ValidationError("glu_backward: grad shape mismatch");
    }
    GluGradients g;
    g.z = FeatureMap(z.height, z.width, z.channels);
    g.weight.assign(z.channels, 0.0);
    g.bias.assign(z.channels, 0.0);
    for (std::size_t j = 0; j < z.patches(); ++j) {
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double x = z.at(j, c);
            const double a = params.weight[c] * x + params.bias[c];
            const double go = grad_out.at(j, c);
            const double da = go * x * sigmoid_deriv(a);
            g.z.at(j, c) = go * sigmoid(a) + da * params.weight[c];
            g.weight[c] += da * x;
            g.bias[c] += da;
        }
    }
    return g;
}

FeatureMap swiglu_baseline(const FeatureMap& z, const SwigluParams& params) {
    check_affine(z, params.value, "swiglu value");
    check_affine(z, params.gate, "swiglu gate");
    FeatureMap out(z.height, z.width, z.channels);
    for (std::size_t j = 0; j < z.patches(); ++j) {
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double x = z.at(j, c);
            const double v = params.value.weight[c] * x + params.value.bias[c];
            const double a = params.gate.weight[c] * x + params.gate.bias[c];
            out.at(j, c) = v * swish(a);
        }
    }
    return out;
}

SwigluGradients swiglu_backward(const FeatureMap& z, const SwigluParams& params,
                                const FeatureMap& grad_out) {
    check_affine(z, params.value, "swiglu_backward value");
    check_affine(z, params.gate, "swiglu_backward gate");
    if (grad_out.data.size() != z.data.size()) {
        throw ValidationError("swiglu_backward: grad shape mismatch");
    }
    SwigluGradients g;
    g.z = FeatureMap(z.height, z.width, z.channels);
    g.value_weight.assign(z.channels, 0.0);
    g.value_bias.assign(z.channels, 0.0);
    g.gate_weight.assign(z.channels, 0.0);
    g.gate_bias.assign(z.channels, 0.0);
    for (std::size_t j = 0; j < z.patches(); ++j) {
        for (std::size_t c = 0; c < z.channels; ++c) {
            const double x = z.at(j, c);
            const double v = params.value.weight[c] * x + params.value.bias[c];
            const double a = params.gate.weight[c] * x + params.gate.bias[c];
            const double go = grad_out.at(j, c);
            const double sw = swish(a);
            const double dsw = swish_deriv(a);
            g.z.at(j, c) = go * (params.value.weight[c] * sw +
                                 v * dsw * params.gate.weight[c]);
            g.value_weight[c] += go * sw * x;
            g.value_bias[c] += go * sw;
            g.gate_weight[c] += go * v * dsw * x;
            g.gate_bias[c] += go * v * dsw;
        }
    }
    return g;
}

}  // namespace camokit
