#include "camokit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace camokit {

namespace {

std::vector<std::size_t> canonical_detection_order(
    std::span<const DetectionRecord> dets) {
    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a].confidence != dets[b].confidence) {
            return dets[a].confidence > dets[b].confidence;
        }
        return dets[a].box.area() < dets[b].box.area();
    });
    return order;
}

using GtFilter = std::function<bool(const GroundTruthRecord&)>;

// One scored detection outcome, carrying the canonical sort keys.
struct Outcome {
    double confidence = 0.0;
    double area = 0.0;
    std::size_t sequence = 0;  // global input order, the last tie-break
    bool tp = false;
};

// Greedy matching for one (class, image) group under a bucket filter:
// out-of-bucket ground truth absorbs detections instead of penalizing them.
void match_group(std::span<const DetectionRecord* const> dets,
                 std::span<const GroundTruthRecord* const> gts,
                 double iou_threshold, const GtFilter& filter,
                 std::vector<Outcome>& outcomes,
                 const std::map<const DetectionRecord*, std::size_t>& sequence) {
    std::vector<bool> active(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) active[g] = filter(*gts[g]);

    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dets[a]->confidence != dets[b]->confidence) {
            return dets[a]->confidence > dets[b]->confidence;
        }
        if (dets[a]->box.area() != dets[b]->box.area()) {
            return dets[a]->box.area() < dets[b]->box.area();
        }
        return sequence.at(dets[a]) < sequence.at(dets[b]);
    });

    std::vector<bool> taken(gts.size(), false);
    for (std::size_t idx : order) {
        const DetectionRecord& det = *dets[idx];
        std::optional<std::size_t> best;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (!active[g] || taken[g]) continue;
            const double overlap = iou(det.box, gts[g]->box);
            if (overlap >= iou_threshold && overlap > best_iou) {
                best_iou = overlap;
                best = g;
            }
        }
        if (best.has_value()) {
            taken[*best] = true;
            outcomes.push_back(Outcome{det.confidence, det.box.area(),
                                       sequence.at(&det), true});
            continue;
        }
        // A detection explained by an out-of-bucket object is ignored.
        bool absorbed = false;
        for (std::size_t g = 0; g < gts.size() && !absorbed; ++g) {
            if (!active[g] && iou(det.box, gts[g]->box) >= iou_threshold) {
                absorbed = true;
            }
        }
        if (!absorbed) {
            outcomes.push_back(Outcome{det.confidence, det.box.area(),
                                       sequence.at(&det), false});
        }
    }
}

std::optional<double> ap_from_outcomes(std::vector<Outcome> outcomes,
                                       std::size_t num_gt) {
    if (num_gt == 0) return std::nullopt;
    std::stable_sort(outcomes.begin(), outcomes.end(),
                     [](const Outcome& a, const Outcome& b) {
                         if (a.confidence != b.confidence) {
                             return a.confidence > b.confidence;
                         }
                         if (a.area != b.area) return a.area < b.area;
                         return a.sequence < b.sequence;
                     });
    std::vector<bool> flags;
    flags.reserve(outcomes.size());
    for (const Outcome& o : outcomes) flags.push_back(o.tp);
    return average_precision(flags, num_gt);
}

}  // namespace

std::vector<MatchResult> match_detections(std::span<const DetectionRecord> dets,
                                          std::span<const GroundTruthRecord> gts,
                                          double iou_threshold) {
    for (const DetectionRecord& d : dets) validate_box(d.box, "match: detection");
    for (const GroundTruthRecord& g : gts) validate_box(g.box, "match: gt");

    const std::vector<std::size_t> order = canonical_detection_order(dets);
    std::vector<bool> taken(gts.size(), false);
    std::vector<MatchResult> results;
    results.reserve(dets.size());
    for (std::size_t idx : order) {
        MatchResult r;
        r.det_index = idx;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g]) continue;
            const double overlap = iou(dets[idx].box, gts[g].box);
            if (overlap >= iou_threshold && overlap > best_iou) {
                best_iou = overlap;
                r.gt_index = g;
            }
        }
        if (r.gt_index.has_value()) taken[*r.gt_index] = true;
        results.push_back(r);
    }
    return results;
}

std::optional<double> average_precision(const std::vector<bool>& tp_sequence,
                                        std::size_t num_gt) {
    if (num_gt == 0) return std::nullopt;
    const std::size_t n = tp_sequence.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (tp_sequence[i]) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    }
    // Running max of precision from the right: value at i is the best
    // precision achievable at recall >= recall[i].
    std::vector<double> best(n);
    double running = 0.0;
    for (std::size_t i = n; i > 0; --i) {
        running = std::max(running, precision[i - 1]);
        best[i - 1] = running;
    }

    double total = 0.0;
    for (int grid = 0; grid <= 100; ++grid) {
        const double r = static_cast<double>(grid) / 100.0;
        // First point with recall >= r.
        double p = 0.0;
        const auto it = std::lower_bound(recall.begin(), recall.end(), r);
        if (it != recall.end()) {
            p = best[static_cast<std::size_t>(it - recall.begin())];
        }
        total += p;
    }
    return total / 101.0;
}

EvalReport evaluate(std::span<const DetectionRecord> dets,
                    std::span<const GroundTruthRecord> gts,
                    const EvalConfig& config) {
    for (const DetectionRecord& d : dets) {
        validate_box(d.box, "evaluate: detection");
        if (!std::isfinite(d.confidence)) {
            throw ValidationError("evaluate: non-finite confidence");
        }
    }
    for (const GroundTruthRecord& g : gts) validate_box(g.box, "evaluate: gt");

    EvalReport report;
    if (gts.empty()) return report;

    std::map<const DetectionRecord*, std::size_t> sequence;
    for (std::size_t i = 0; i < dets.size(); ++i) sequence.emplace(&dets[i], i);

    std::set<int> class_ids;
    for (const GroundTruthRecord& g : gts) class_ids.insert(g.class_index);

    // class -> image -> group
    std::map<int, std::map<int, std::vector<const DetectionRecord*>>> det_groups;
    std::map<int, std::map<int, std::vector<const GroundTruthRecord*>>> gt_groups;
    for (const DetectionRecord& d : dets) {
        det_groups[d.class_index][d.image_id].push_back(&d);
    }
    for (const GroundTruthRecord& g : gts) {
        gt_groups[g.class_index][g.image_id].push_back(&g);
    }

    // Mean AP over classes with >= 1 in-bucket ground truth, at one threshold.
    const auto sweep_ap = [&](double threshold,
                              const GtFilter& filter) -> std::optional<double> {
        double sum = 0.0;
        std::size_t classes_counted = 0;
        for (int cls : class_ids) {
            std::size_t num_gt = 0;
            std::vector<Outcome> outcomes;
            const auto& gt_images = gt_groups[cls];
            for (const auto& [image_id, group] : gt_images) {
                for (const GroundTruthRecord* g : group) {
                    if (filter(*g)) ++num_gt;
                }
            }
            if (num_gt == 0) continue;
            auto& det_images = det_groups[cls];
            for (const auto& [image_id, group] : det_images) {
                static const std::vector<const GroundTruthRecord*> kNoGts;
                const auto it = gt_images.find(image_id);
                match_group(group, it == gt_images.end() ? kNoGts : it->second,
                            threshold, filter, outcomes, sequence);
            }
            const std::optional<double> ap = ap_from_outcomes(std::move(outcomes), num_gt);
            if (ap.has_value()) {
                sum += *ap;
                ++classes_counted;
            }
        }
        if (classes_counted == 0) return std::nullopt;
        return sum / static_cast<double>(classes_counted);
    };

    const auto sweep_mean = [&](const GtFilter& filter) -> std::optional<double> {
        double sum = 0.0;
        for (double thr : config.iou_thresholds) {
            const std::optional<double> ap = sweep_ap(thr, filter);
            if (!ap.has_value()) return std::nullopt;
            sum += *ap;
        }
        return sum / static_cast<double>(config.iou_thresholds.size());
    };

    const GtFilter all = [](const GroundTruthRecord&) { return true; };
    report.ap = sweep_mean(all);
    report.ap50 = sweep_ap(0.50, all);
    report.ap75 = sweep_ap(0.75, all);

    const GtFilter medium = [&](const GroundTruthRecord& g) {
        return g.pixel_area.has_value() && *g.pixel_area >= config.medium_area_min &&
               *g.pixel_area < config.medium_area_max;
    };
    const GtFilter large = [&](const GroundTruthRecord& g) {
        return g.pixel_area.has_value() && *g.pixel_area >= config.medium_area_max;
    };
    report.ap_medium = sweep_mean(medium);
    report.ap_large = sweep_mean(large);

    const bool any_difficulty =
        std::any_of(gts.begin(), gts.end(),
                    [](const GroundTruthRecord& g) { return g.difficulty.has_value(); });
    if (any_difficulty) {
        const auto level_filter = [](DifficultyLevel level) {
            return GtFilter([level](const GroundTruthRecord& g) {
                return g.difficulty.has_value() && *g.difficulty == level;
            });
        };
        report.ap_mild = sweep_mean(level_filter(DifficultyLevel::Mild));
        report.ap_moderate = sweep_mean(level_filter(DifficultyLevel::Moderate));
        report.ap_severe = sweep_mean(level_filter(DifficultyLevel::Severe));
    }

    // Per-class table over the full (unfiltered) ground truth.
    for (int cls : class_ids) {
        ClassApEntry entry;
        entry.class_index = cls;
        const auto& gt_images = gt_groups[cls];
        for (const auto& [image_id, group] : gt_images) {
            entry.num_gt += group.size();
        }
        double sum = 0.0;
        double ap50 = 0.0, ap75 = 0.0;
        for (double thr : config.iou_thresholds) {
            std::vector<Outcome> outcomes;
            auto& det_images = det_groups[cls];
            for (const auto& [image_id, group] : det_images) {
                static const std::vector<const GroundTruthRecord*> kNoGts;
                const auto it = gt_images.find(image_id);
                match_group(group, it == gt_images.end() ? kNoGts : it->second, thr,
                            all, outcomes, sequence);
            }
            const double ap =
                ap_from_outcomes(std::move(outcomes), entry.num_gt).value_or(0.0);
            sum += ap;
            if (thr == 0.50) ap50 = ap;
            if (thr == 0.75) ap75 = ap;
        }
        entry.ap = sum / static_cast<double>(config.iou_thresholds.size());
        entry.ap50 = ap50;
        entry.ap75 = ap75;
        report.per_class.push_back(entry);
    }
    return report;
}

}  // namespace camokit
