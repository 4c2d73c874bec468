#pragma once

#include <array>
#include <vector>

#include "camokit/numerics.hpp"

namespace camokit {

/// Axis-aligned box in normalized corner form; 0 <= x1 <= x2 <= 1 and
/// likewise for y. The YOLO center form exists only at file boundaries.
struct BBox {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const;

    static BBox from_yolo(double cx, double cy, double w, double h);
    std::array<double, 4> to_yolo() const;  // cx, cy, w, h
};

void validate_box(const BBox& b, const char* what);

/// The per-image set of region/object embeddings plus their cached mean.
struct EmbeddingField {
    std::vector<Vector> embeddings;
    Vector mean;

    static EmbeddingField from(std::vector<Vector> embeddings);
};

struct AlignmentConfig {
    double lambda = 5.0;  // coverage-loss weight
};

double intersect_area(const BBox& a, const BBox& b);

double iou(const BBox& a, const BBox& b);

/// Index of the region embedding most similar (cosine) to the refined
/// sub-description; ties break toward the lowest index.
std::size_t select_specific_region(const EmbeddingField& field,
                                   std::span<const double> t_refined);

/// The coverage loss applies only where the assigned positive region is also
/// the most text-specific one.
inline bool alignment_gate(std::size_t positive_index,
                           std::size_t specific_index) {
    return positive_index == specific_index;
}

/// 1 - |pred ∩ gt| / |pred|: zero iff the prediction lies inside the target.
double coverage_loss(const BBox& pred, const BBox& gt);

/// Piecewise gradient of coverage_loss w.r.t. (pred.x1, pred.y1, pred.x2,
/// pred.y2). At clamp boundaries (touching edges) the one-sided value toward
/// the interior is reported; those points are genuinely nondifferentiable.
std::array<double, 4> coverage_loss_grad(const BBox& pred, const BBox& gt);

struct CoveragePair {
    BBox pred;
    BBox gt;
    bool gated = false;
};

/// lambda * mean coverage loss over gated pairs; zero when nothing is gated
/// or the weight is zero.
double batch_coverage_term(std::span<const CoveragePair> pairs,
                           const AlignmentConfig& cfg);

}  // namespace camokit
