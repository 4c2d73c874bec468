#include "camokit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace camokit {

namespace {

// Fixed (non-learned) gate parameters: the benchmark isolates the fusion and
// gating mechanisms, so these stay constant across runs.
constexpr double kSfgluConvWeight = 5.0;
constexpr double kSfgluConvBias = -14.0;
constexpr double kGluBias = 4.0;        // sigma(4) ~ 0.982: near-identity gate
constexpr double kSwigluGateBias = 1.23;  // swish(1.23) ~ 0.95: mild damping

Vector readout_embedding(const Matrix& projection, const FeatureMap& features,
                         std::size_t patch) {
    Vector e(projection.rows, 0.0);
    for (std::size_t d = 0; d < projection.rows; ++d) {
        double s = 0.0;
        for (std::size_t c = 0; c < projection.cols; ++c) {
            s += projection.at(d, c) * features.at(patch, c);
        }
        e[d] = s;
    }
    return e;
}

struct Component {
    std::vector<std::size_t> cells;
    double mean_score = 0.0;
};

std::vector<Component> connected_components(const std::vector<bool>& above,
                                            const Vector& scores, std::size_t h,
                                            std::size_t w) {
    std::vector<Component> components;
    std::vector<bool> visited(h * w, false);
    for (std::size_t start = 0; start < h * w; ++start) {
        if (!above[start] || visited[start]) continue;
        Component comp;
        std::vector<std::size_t> stack{start};
        visited[start] = true;
        while (!stack.empty()) {
            const std::size_t cell = stack.back();
            stack.pop_back();
            comp.cells.push_back(cell);
            const std::size_t row = cell / w, col = cell % w;
            const std::size_t neighbors[4] = {
                row > 0 ? cell - w : cell, row + 1 < h ? cell + w : cell,
                col > 0 ? cell - 1 : cell, col + 1 < w ? cell + 1 : cell};
            for (std::size_t n : neighbors) {
                if (n != cell && above[n] && !visited[n]) {
                    visited[n] = true;
                    stack.push_back(n);
                }
            }
        }
        double sum = 0.0;
        for (std::size_t cell : comp.cells) sum += scores[cell];
        comp.mean_score = sum / static_cast<double>(comp.cells.size());
        components.push_back(std::move(comp));
    }
    return components;
}

std::string lambda_key(double lambda) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%g", lambda);
    return buffer;
}

BBox cells_to_box(const std::vector<std::size_t>& cells, std::size_t h,
                  std::size_t w) {
    std::size_t min_r = h, max_r = 0, min_c = w, max_c = 0;
    for (std::size_t cell : cells) {
        const std::size_t r = cell / w, c = cell % w;
        min_r = std::min(min_r, r);
        max_r = std::max(max_r, r);
        min_c = std::min(min_c, c);
        max_c = std::max(max_c, c);
    }
    return BBox{static_cast<double>(min_c) / w, static_cast<double>(min_r) / h,
                static_cast<double>(max_c + 1) / w,
                static_cast<double>(max_r + 1) / h};
}

}  // namespace

const char* fusion_variant_name(FusionVariant v) {
    switch (v) {
        case FusionVariant::SumNormalize: return "sum_normalize";
        case FusionVariant::Contrastive: return "contrastive";
        case FusionVariant::Orthogonal: return "orthogonal";
        case FusionVariant::OrthogonalContrastive: return "orthogonal_contrastive";
    }
    return "unknown";
}

const char* gate_variant_name(GateVariant v) {
    switch (v) {
        case GateVariant::None: return "none";
        case GateVariant::Glu: return "glu";
        case GateVariant::Swiglu: return "swiglu";
        case GateVariant::Sfglu: return "sfglu";
    }
    return "unknown";
}

FusionVariant parse_fusion_variant(const std::string& name) {
    for (FusionVariant v :
         {FusionVariant::SumNormalize, FusionVariant::Contrastive,
          FusionVariant::Orthogonal, FusionVariant::OrthogonalContrastive}) {
        if (name == fusion_variant_name(v)) return v;
    }
    throw ValidationError("unknown fusion variant: " + name);
}

GateVariant parse_gate_variant(const std::string& name) {
    for (GateVariant v : {GateVariant::None, GateVariant::Glu, GateVariant::Swiglu,
                          GateVariant::Sfglu}) {
        if (name == gate_variant_name(v)) return v;
    }
    throw ValidationError("unknown gate variant: " + name);
}

PipelineResult run_pipeline(const SynthScene& scene, const RunConfig& run) {
    PipelineResult result;
    if (scene.sub_descriptions.empty()) return result;

    const std::size_t n_cells = scene.height * scene.width;
    const std::size_t dim = scene.field.mean.size();
    const AdapterParams adapter = AdapterParams::identity(dim);

    // Positive sample per class: the refiner-assigned center cell.
    std::map<int, const SynthObject*> object_by_class;
    for (const SynthObject& obj : scene.objects) {
        object_by_class.emplace(obj.class_id, &obj);
    }

    std::vector<FusedClassEmbedding> fused;
    std::vector<Matrix> refined_per_class;
    const bool contrastive_like =
        run.fusion == FusionVariant::Contrastive ||
        run.fusion == FusionVariant::OrthogonalContrastive;
    for (const SubDescriptionSet& set : scene.sub_descriptions) {
        Matrix refined = adapter_forward_rows(
            adapter, decorrelate(set, run.svd_rank_max, run.svd_rank_min));

        FusionWeights weights;
        if (contrastive_like) {
            const auto it = object_by_class.find(set.class_id);
            const Vector& v_region =
                it != object_by_class.end()
                    ? scene.field.embeddings[it->second->center_cell]
                    : scene.field.mean;
            weights = contrastive_weights(v_region, scene.field.mean, refined);
            result.diagnostics.fusion_weights.push_back(weights);
        }

        switch (run.fusion) {
            case FusionVariant::SumNormalize:
                fused.push_back(fuse_sum_normalize(set));
                break;
            case FusionVariant::Contrastive:
                fused.push_back(fuse_contrastive(weights, refined, set.class_id));
                break;
            case FusionVariant::Orthogonal:
                fused.push_back(fuse_orthogonal(refined, nullptr, set.class_id));
                break;
            case FusionVariant::OrthogonalContrastive:
                fused.push_back(fuse_orthogonal(refined, &weights, set.class_id));
                break;
        }
        refined_per_class.push_back(std::move(refined));
    }

    // Decoy/informative weight split (generator convention: decoys last).
    if (contrastive_like && !result.diagnostics.fusion_weights.empty()) {
        double decoy_sum = 0.0, info_sum = 0.0;
        std::size_t decoy_n = 0, info_n = 0;
        for (std::size_t c = 0; c < result.diagnostics.fusion_weights.size(); ++c) {
            const auto& labels = scene.sub_descriptions[c].labels;
            const Vector& beta = result.diagnostics.fusion_weights[c].normalized;
            for (std::size_t k = 0; k < beta.size(); ++k) {
                const bool decoy =
                    k < labels.size() && labels[k].starts_with("decoy");
                if (decoy) {
                    decoy_sum += beta[k];
                    ++decoy_n;
                } else {
                    info_sum += beta[k];
                    ++info_n;
                }
            }
        }
        if (decoy_n > 0) result.diagnostics.mean_beta_decoy = decoy_sum / decoy_n;
        if (info_n > 0) result.diagnostics.mean_beta_informative = info_sum / info_n;
    }

    const SimilarityField similarity = region_scores(fused, scene.field);

    FeatureMap gated = scene.features;
    switch (run.gate) {
        case GateVariant::None:
            break;
        case GateVariant::Glu: {
            ChannelAffine params;
            params.weight.assign(scene.channels, 0.0);
            params.bias.assign(scene.channels, kGluBias);
            gated = glu_baseline(scene.features, params);
            break;
        }
        case GateVariant::Swiglu: {
            SwigluParams params;
            params.value.weight.assign(scene.channels, 1.0);
            params.value.bias.assign(scene.channels, 0.0);
            params.gate.weight.assign(scene.channels, 0.0);
            params.gate.bias.assign(scene.channels, kSwigluGateBias);
            gated = swiglu_baseline(scene.features, params);
            break;
        }
        case GateVariant::Sfglu: {
            const std::size_t target = target_patch(similarity);
            const PatchGrid grid = PatchGrid::regular(scene.height, scene.width);
            const Vector distances =
                spatial_distances(grid, target, run.gate_config.epsilon);
            GateConvParams conv;
            conv.weight.assign(scene.channels, kSfgluConvWeight);
            conv.bias.assign(scene.channels, kSfgluConvBias);
            gated = sfglu_gate(scene.features, similarity, distances, conv,
                               run.gate_config);
            break;
        }
    }

    // Focus diagnostics: feature magnitude change inside vs outside the
    // ground-truth blocks.
    {
        std::vector<bool> inside(n_cells, false);
        for (const SynthObject& obj : scene.objects) {
            for (std::size_t cell : obj.cells) inside[cell] = true;
        }
        double in_sum = 0.0, out_sum = 0.0;
        std::size_t in_n = 0, out_n = 0;
        for (std::size_t j = 0; j < n_cells; ++j) {
            double raw = 0.0, now = 0.0;
            for (std::size_t c = 0; c < scene.channels; ++c) {
                raw += scene.features.at(j, c) * scene.features.at(j, c);
                now += gated.at(j, c) * gated.at(j, c);
            }
            if (raw <= 0.0) continue;
            const double gain = std::sqrt(now / raw);
            if (inside[j]) {
                in_sum += gain;
                ++in_n;
            } else {
                out_sum += gain;
                ++out_n;
            }
        }
        result.diagnostics.gain_inside = in_n > 0 ? in_sum / in_n : 1.0;
        result.diagnostics.gain_outside = out_n > 0 ? out_sum / out_n : 1.0;
        result.diagnostics.focus_ratio =
            result.diagnostics.gain_outside > 0.0
                ? result.diagnostics.gain_inside / result.diagnostics.gain_outside
                : 1.0;
    }

    // Fixed linear readout: project gated features back to embedding space
    // and score against the (unit-normalized) fused class embedding.
    for (std::size_t ci = 0; ci < fused.size(); ++ci) {
        const FusedClassEmbedding& fc = fused[ci];
        if (fc.degenerate) continue;
        const Vector dir = vec::normalized(fc.vector);
        Vector scores(n_cells, 0.0);
        std::vector<bool> above(n_cells, false);
        for (std::size_t j = 0; j < n_cells; ++j) {
            const Vector e = readout_embedding(scene.projection, gated, j);
            scores[j] = sigmoid(dot(dir, e));
            above[j] = scores[j] > run.score_threshold;
        }
        for (const Component& comp :
             connected_components(above, scores, scene.height, scene.width)) {
            DetectionRecord det;
            det.image_id = scene.scene_index;
            det.class_index = fc.class_id;
            det.box = cells_to_box(comp.cells, scene.height, scene.width);
            det.confidence = comp.mean_score;
            result.detections.push_back(det);
        }
    }

    // Coverage diagnostics: one pair per (object, sub-description), gated
    // where the positive cell is also the most text-specific region.
    for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
        const SynthObject& obj = scene.objects[oi];
        const std::size_t cls = static_cast<std::size_t>(obj.class_id);
        if (cls >= refined_per_class.size()) continue;
        const Matrix& refined = refined_per_class[cls];

        // Predicted box for the positive cell: its detection component if one
        // contains it, otherwise the bare cell.
        BBox pred = cells_to_box({obj.center_cell}, scene.height, scene.width);
        for (const DetectionRecord& det : result.detections) {
            if (det.class_index != obj.class_id) continue;
            const std::size_t row = obj.center_cell / scene.width;
            const std::size_t col = obj.center_cell % scene.width;
            const double cx = (static_cast<double>(col) + 0.5) / scene.width;
            const double cy = (static_cast<double>(row) + 0.5) / scene.height;
            if (det.box.x1 <= cx && cx <= det.box.x2 && det.box.y1 <= cy &&
                cy <= det.box.y2) {
                pred = det.box;
                break;
            }
        }

        for (std::size_t k = 0; k < refined.rows; ++k) {
            if (norm(refined.row(k)) <= 1e-12) continue;
            const std::size_t specific =
                select_specific_region(scene.field, refined.row(k));
            CoveragePair pair;
            pair.pred = pred;
            pair.gt = obj.box;
            pair.gated = alignment_gate(obj.center_cell, specific);
            if (pair.gated) ++result.diagnostics.gated_pair_count;
            result.diagnostics.coverage_pairs.push_back(pair);
        }
    }
    result.diagnostics.coverage_term = batch_coverage_term(
        result.diagnostics.coverage_pairs, AlignmentConfig{run.lambda});

    return result;
}

std::vector<RunConfig> BenchConfig::default_runs() {
    std::vector<RunConfig> runs;
    for (FusionVariant fusion :
         {FusionVariant::SumNormalize, FusionVariant::Contrastive,
          FusionVariant::Orthogonal, FusionVariant::OrthogonalContrastive}) {
        RunConfig run;
        run.fusion = fusion;
        runs.push_back(run);
    }
    for (GateVariant gate : {GateVariant::Glu, GateVariant::Swiglu, GateVariant::Sfglu}) {
        RunConfig run;
        run.fusion = FusionVariant::Contrastive;
        run.gate = gate;
        runs.push_back(run);
    }
    return runs;
}

const VariantReport* BenchReport::find(FusionVariant fusion, GateVariant gate) const {
    for (const VariantReport& v : variants) {
        if (v.fusion == fusion && v.gate == gate) return &v;
    }
    return nullptr;
}

BenchReport run_benchmark(const BenchConfig& cfg) {
    validate_config(cfg.synth);
    if (cfg.num_seeds < 1) throw ValidationError("benchmark: need at least one seed");
    const std::vector<RunConfig> runs =
        cfg.runs.empty() ? BenchConfig::default_runs() : cfg.runs;

    BenchReport report;
    report.num_seeds = cfg.num_seeds;
    report.variants.resize(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        report.variants[r].fusion = runs[r].fusion;
        report.variants[r].gate = runs[r].gate;
    }

    std::vector<Vector> mild, moderate, severe;  // per variant, per seed
    mild.resize(runs.size());
    moderate.resize(runs.size());
    severe.resize(runs.size());

    for (std::size_t seed_idx = 0; seed_idx < cfg.num_seeds; ++seed_idx) {
        SynthConfig synth = cfg.synth;
        synth.seed = cfg.synth.seed + seed_idx;

        std::vector<SynthScene> scenes;
        scenes.reserve(synth.scenes);
        for (std::size_t s = 0; s < synth.scenes; ++s) {
            scenes.push_back(generate_scene(synth, static_cast<int>(s)));
        }

        // Difficulty levels over this seed's instances.
        std::vector<GroundTruthRecord> gts;
        Vector difficulty;
        for (const SynthScene& scene : scenes) {
            for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
                gts.push_back(scene.ground_truth[oi]);
                difficulty.push_back(scene_difficulty_score(scene, oi));
            }
        }
        if (difficulty.size() >= 3) {
            const std::vector<DifficultyLevel> levels = split_by_terciles(difficulty);
            for (std::size_t i = 0; i < gts.size(); ++i) {
                gts[i].difficulty = levels[i];
            }
        }

        for (std::size_t r = 0; r < runs.size(); ++r) {
            std::vector<DetectionRecord> dets;
            double beta_decoy = 0.0, beta_info = 0.0, focus = 0.0;
            std::map<std::string, double> coverage_sums;
            for (const SynthScene& scene : scenes) {
                PipelineResult scene_result = run_pipeline(scene, runs[r]);
                dets.insert(dets.end(), scene_result.detections.begin(),
                            scene_result.detections.end());
                beta_decoy += scene_result.diagnostics.mean_beta_decoy;
                beta_info += scene_result.diagnostics.mean_beta_informative;
                focus += scene_result.diagnostics.focus_ratio;
                for (double lambda : cfg.lambda_sweep) {
                    coverage_sums[lambda_key(lambda)] +=
                        batch_coverage_term(scene_result.diagnostics.coverage_pairs,
                                            AlignmentConfig{lambda});
                }
            }
            const double inv_scenes = 1.0 / static_cast<double>(scenes.size());

            const EvalReport eval_report = evaluate(dets, gts);
            VariantReport& variant = report.variants[r];
            variant.per_seed_ap.push_back(eval_report.ap.value_or(0.0));
            if (eval_report.ap_mild) mild[r].push_back(*eval_report.ap_mild);
            if (eval_report.ap_moderate) moderate[r].push_back(*eval_report.ap_moderate);
            if (eval_report.ap_severe) severe[r].push_back(*eval_report.ap_severe);
            variant.mean_beta_decoy += beta_decoy * inv_scenes;
            variant.mean_beta_informative += beta_info * inv_scenes;
            variant.mean_focus_ratio += focus * inv_scenes;
            for (const auto& [key, value] : coverage_sums) {
                variant.coverage_by_lambda[key] += value * inv_scenes;
            }
        }
    }

    const double inv_seeds = 1.0 / static_cast<double>(cfg.num_seeds);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        VariantReport& variant = report.variants[r];
        variant.mean_ap = pairwise_sum(variant.per_seed_ap) * inv_seeds;
        variant.mean_beta_decoy *= inv_seeds;
        variant.mean_beta_informative *= inv_seeds;
        variant.mean_focus_ratio *= inv_seeds;
        for (auto& [key, value] : variant.coverage_by_lambda) value *= inv_seeds;
        const auto mean_of = [](const Vector& v) -> std::optional<double> {
            if (v.empty()) return std::nullopt;
            return pairwise_sum(v) / static_cast<double>(v.size());
        };
        variant.mean_ap_mild = mean_of(mild[r]);
        variant.mean_ap_moderate = mean_of(moderate[r]);
        variant.mean_ap_severe = mean_of(severe[r]);
    }
    return report;
}

std::size_t count_wins(const VariantReport& a, const VariantReport& b) {
    std::size_t wins = 0;
    for (std::size_t i = 0; i < a.per_seed_ap.size() && i < b.per_seed_ap.size(); ++i) {
        if (a.per_seed_ap[i] > b.per_seed_ap[i]) ++wins;
    }
    return wins;
}

}  // namespace camokit
