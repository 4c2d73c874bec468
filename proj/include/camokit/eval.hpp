#pragma once

#include <map>
#include <optional>
#include <vector>

#include "camokit/alignment.hpp"
#include "camokit/dataset.hpp"

namespace camokit {

struct DetectionRecord {
    int image_id = 0;
    int class_index = 0;
    BBox box;
    double confidence = 0.0;
};

struct GroundTruthRecord {
    int image_id = 0;
    int class_index = 0;
    BBox box;
    std::optional<double> pixel_area;            // enables the scale buckets
    std::optional<DifficultyLevel> difficulty;   // enables the difficulty table
};

struct MatchResult {
    std::size_t det_index = 0;                 // index into the caller's list
    std::optional<std::size_t> gt_index;       // matched ground truth, if any
};

/// Greedy matching inside one (class, image) group: detections are visited
/// in canonical order (confidence desc, box area asc, input order) and take
/// the unmatched ground truth with the highest IoU >= threshold.
std::vector<MatchResult> match_detections(std::span<const DetectionRecord> dets,
                                          std::span<const GroundTruthRecord> gts,
                                          double iou_threshold);

/// 101-point interpolated average precision from an ordered TP/FP sequence.
/// Returns nullopt when there is no ground truth (absent bucket, not zero).
std::optional<double> average_precision(const std::vector<bool>& tp_sequence,
                                        std::size_t num_gt);

struct EvalConfig {
    std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                          0.75, 0.80, 0.85, 0.90, 0.95};
    double medium_area_min = 32.0 * 32.0;
    double medium_area_max = 96.0 * 96.0;  // exclusive; large starts here
};

struct ClassApEntry {
    int class_index = 0;
    std::size_t num_gt = 0;
    double ap = 0.0;    // mean over the IoU threshold sweep
    double ap50 = 0.0;
    double ap75 = 0.0;
};

struct EvalReport {
    std::optional<double> ap;        // mean over thresholds of class-mean AP
    std::optional<double> ap50;
    std::optional<double> ap75;
    std::optional<double> ap_medium;
    std::optional<double> ap_large;
    std::optional<double> ap_mild;
    std::optional<double> ap_moderate;
    std::optional<double> ap_severe;
    std::vector<ClassApEntry> per_class;
};

/// COCO-style evaluation: classes without ground truth are excluded from the
/// means; scale and difficulty buckets ignore (rather than penalize)
/// detections that match out-of-bucket ground truth.
EvalReport evaluate(std::span<const DetectionRecord> dets,
                    std::span<const GroundTruthRecord> gts,
                    const EvalConfig& config = {});

}  // namespace camokit
