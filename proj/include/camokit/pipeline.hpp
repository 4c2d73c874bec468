#pragma once

#include <map>
#include <string>

#include "camokit/synth.hpp"

namespace camokit {

enum class FusionVariant { SumNormalize, Contrastive, Orthogonal, OrthogonalContrastive };
enum class GateVariant { None, Glu, Swiglu, Sfglu };

const char* fusion_variant_name(FusionVariant v);
const char* gate_variant_name(GateVariant v);
FusionVariant parse_fusion_variant(const std::string& name);
GateVariant parse_gate_variant(const std::string& name);

struct RunConfig {
    FusionVariant fusion = FusionVariant::Contrastive;
    GateVariant gate = GateVariant::None;
    std::size_t svd_rank_min = 3;
    std::size_t svd_rank_max = 10;
    double lambda = 5.0;
    GateConfig gate_config;
    double score_threshold = 0.6;
};

struct SceneDiagnostics {
    // One entry per class for the contrastive variants (empty otherwise).
    std::vector<FusionWeights> fusion_weights;
    // Mean per-sub weight split for decoy vs informative rows, when known.
    double mean_beta_decoy = 0.0;
    double mean_beta_informative = 0.0;
    // ||gated|| / ||raw|| feature magnitude, inside vs outside ground truth.
    double gain_inside = 1.0;
    double gain_outside = 1.0;
    double focus_ratio = 1.0;
    std::vector<CoveragePair> coverage_pairs;
    double coverage_term = 0.0;  // batch term at the run's lambda
    std::size_t gated_pair_count = 0;
};

struct PipelineResult {
    std::vector<DetectionRecord> detections;
    SceneDiagnostics diagnostics;
};

/// Full desk-scale pass over one scene: fuse text per variant, score regions,
/// apply the configured gate, read out per-patch class scores, and turn
/// connected high-score patches into detections.
PipelineResult run_pipeline(const SynthScene& scene, const RunConfig& run);

struct VariantReport {
    FusionVariant fusion = FusionVariant::Contrastive;
    GateVariant gate = GateVariant::None;
    Vector per_seed_ap;     // one entry per seed
    double mean_ap = 0.0;
    std::optional<double> mean_ap_mild;
    std::optional<double> mean_ap_moderate;
    std::optional<double> mean_ap_severe;
    double mean_beta_decoy = 0.0;
    double mean_beta_informative = 0.0;
    double mean_focus_ratio = 1.0;
    std::map<std::string, double> coverage_by_lambda;  // "0", "2", "5", ...
};

struct BenchConfig {
    SynthConfig synth;
    std::size_t num_seeds = 20;
    std::vector<RunConfig> runs;
    std::vector<double> lambda_sweep = {0.0, 2.0, 5.0, 7.0, 10.0};

    /// Default comparison set: every fusion variant ungated, plus every gate
    /// variant under contrastive fusion.
    static std::vector<RunConfig> default_runs();
};

struct BenchReport {
    std::vector<VariantReport> variants;
    std::size_t num_seeds = 0;

    const VariantReport* find(FusionVariant fusion, GateVariant gate) const;
};

/// Runs every configured variant on the same per-seed scenes so variant
/// comparisons are paired. Deterministic in the synth seed.
BenchReport run_benchmark(const BenchConfig& cfg);

/// Per-seed wins of `a` over `b` (strictly greater AP).
std::size_t count_wins(const VariantReport& a, const VariantReport& b);

}  // namespace camokit
