#pragma once

#include <array>
#include <vector>

#include "camokit/numerics.hpp"
#include "camokit/textfusion.hpp"
#include "camokit/alignment.hpp"

namespace camokit {

/// Dense H x W x C activation grid, row-major by (row, col, channel).
struct FeatureMap {
    std::size_t height = 0, width = 0, channels = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(std::size_t h, std::size_t w, std::size_t c)
        : height(h), width(w), channels(c), data(h * w * c, 0.0) {}

    std::size_t patches() const { return height * width; }
    double& at(std::size_t patch, std::size_t channel) {
        return data[patch * channels + channel];
    }
    double at(std::size_t patch, std::size_t channel) const {
        return data[patch * channels + channel];
    }
};

/// Per-patch text-region similarity, each value a sigmoid output in (0, 1).
struct SimilarityField {
    Vector scores;
};

/// Cell-center coordinates of an H x W grid in the unit square;
/// patch j = row * W + col sits at ((col+0.5)/W, (row+0.5)/H).
struct PatchGrid {
    std::vector<std::array<double, 2>> coords;

    static PatchGrid regular(std::size_t height, std::size_t width);
};

struct GateConfig {
    double temperature = 1.0;  // r: sharpness of the distance falloff
    double alpha = 1.0;        // gain stays inside (1, 1+alpha)
    double epsilon = 1e-8;     // distance clamp at the target patch
};

/// 1x1 convolution expanding the scalar gate drive to C channels.
struct GateConvParams {
    Vector weight;  // per output channel
    Vector bias;
};

/// S_j = max over classes of sigmoid(t_fused . v_j).
SimilarityField region_scores(std::span<const FusedClassEmbedding> fused,
                              const EmbeddingField& field);

/// argmax_j S_j, ties toward the lowest index. Downstream gradients treat
/// the returned index as a constant.
std::size_t target_patch(const SimilarityField& s);

/// d_j = max(||p_j - p_target||, eps); the target patch itself gets eps.
Vector spatial_distances(const PatchGrid& grid, std::size_t target, double eps);

/// out(j,c) = z(j,c) * (1 + alpha * sigmoid(w_c * S_j/(r*d_j) + b_c)).
/// Every gain is strictly inside (1, 1+alpha), so sign and magnitude order
/// of the input survive.
FeatureMap sfglu_gate(const FeatureMap& z, const SimilarityField& s,
                      std::span<const double> d, const GateConvParams& conv,
                      const GateConfig& cfg);

struct SfgluGradients {
    FeatureMap z;
    Vector conv_weight;
    Vector conv_bias;
    Vector scores;  // dLoss/dS_j (distances held fixed)
};

SfgluGradients sfglu_gate_backward(const FeatureMap& z, const SimilarityField& s,
                                   std::span<const double> d,
                                   const GateConvParams& conv,
                                   const GateConfig& cfg,
                                   const FeatureMap& grad_out);

/// Per-channel scalar affine used by the ablation gates.
struct ChannelAffine {
    Vector weight;
    Vector bias;
};

/// z * sigmoid(w_c z + b_c), channelwise.
FeatureMap glu_baseline(const FeatureMap& z, const ChannelAffine& params);

struct GluGradients {
    FeatureMap z;
    Vector weight;
    Vector bias;
};

GluGradients glu_backward(const FeatureMap& z, const ChannelAffine& params,
                          const FeatureMap& grad_out);

struct SwigluParams {
    ChannelAffine value;
    ChannelAffine gate;
};

/// (w1_c z + b1_c) * swish(w2_c z + b2_c), channelwise.
FeatureMap swiglu_baseline(const FeatureMap& z, const SwigluParams& params);

struct SwigluGradients {
    FeatureMap z;
    Vector value_weight, value_bias;
    Vector gate_weight, gate_bias;
};

SwigluGradients swiglu_backward(const FeatureMap& z, const SwigluParams& params,
                                const FeatureMap& grad_out);

}  // namespace camokit
