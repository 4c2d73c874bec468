#include "camokit/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace camokit {

bool BBox::valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && 0.0 <= x1 && x1 <= x2 && x2 <= 1.0 &&
           0.0 <= y1 && y1 <= y2 && y2 <= 1.0;
}

void validate_box(const BBox& b, const char* what) {
    if (!b.valid()) {
        throw ValidationError(std::string(what) + ": invalid box [" +
                              std::to_string(b.x1) + ", " + std::to_string(b.y1) +
                              ", " + std::to_string(b.x2) + ", " +
                              std::to_string(b.y2) + "]");
    }
}

BBox BBox::from_yolo(double cx, double cy, double w, double h) {
    BBox b{cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
    // Strict boundary clamping: sources routinely carry boxes that poke a
    // fraction of a pixel outside the image.
    b.x1 = std::clamp(b.x1, 0.0, 1.0);
    b.y1 = std::clamp(b.y1, 0.0, 1.0);
    b.x2 = std::clamp(b.x2, b.x1, 1.0);
    b.y2 = std::clamp(b.y2, b.y1, 1.0);
    return b;
}

std::array<double, 4> BBox::to_yolo() const {
    return {(x1 + x2) / 2.0, (y1 + y2) / 2.0, width(), height()};
}

EmbeddingField EmbeddingField::from(std::vector<Vector> embeddings) {
    if (embeddings.empty()) {
        throw ValidationError("embedding field: needs at least one embedding");
    }
    const std::size_t dim = embeddings.front().size();
    EmbeddingField field;
    field.mean.assign(dim, 0.0);
    for (const Vector& e : embeddings) {
        if (e.size() != dim) {
            throw ValidationError("embedding field: inconsistent dimensions");
        }
        vec::add_inplace(field.mean, e);
    }
    for (double& v : field.mean) v /= static_cast<double>(embeddings.size());
    field.embeddings = std::move(embeddings);
    return field;
}

double intersect_area(const BBox& a, const BBox& b) {
    validate_box(a, "intersect_area");
    validate_box(b, "intersect_area");
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    return std::max(0.0, w) * std::max(0.0, h);
}

double iou(const BBox& a, const BBox& b) {
    const double inter = intersect_area(a, b);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::size_t select_specific_region(const EmbeddingField& field,
                                   std::span<const double> t_refined) {
    if (field.embeddings.empty()) {
        throw ValidationError("select_specific_region: empty field");
    }
    bool any_valid = false;
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < field.embeddings.size(); ++i) {
        const Vector& v = field.embeddings[i];
        if (norm(v) <= 1e-12) continue;
        const double sim = cosine(v, t_refined);
        if (!any_valid || sim > best_sim) {
            any_valid = true;
            best = i;
            best_sim = sim;
        }
    }
    if (!any_valid) {
        throw DegenerateInputError("select_specific_region: all embeddings zero");
    }
    return best;
}

double coverage_loss(const BBox& pred, const BBox& gt) {
    validate_box(pred, "coverage_loss pred");
    validate_box(gt, "coverage_loss gt");
    const double pred_area = pred.area();
    if (pred_area <= 0.0) {
        throw DegenerateInputError("coverage_loss: zero-area prediction");
    }
    return 1.0 - intersect_area(pred, gt) / pred_area;
}

std::array<double, 4> coverage_loss_grad(const BBox& pred, const BBox& gt) {
    validate_box(pred, "coverage_loss_grad pred");
    validate_box(gt, "coverage_loss_grad gt");
    const double area = pred.area();
    if (area <= 0.0) {
        throw DegenerateInputError("coverage_loss_grad: zero-area prediction");
    }

    const double iw = std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1);
    const double ih = std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1);
    const double inter = std::max(0.0, iw) * std::max(0.0, ih);

    // d(inter)/d(corner): each pred corner moves the overlap edge only while
    // it is the binding one and the overlap is nonzero.
    double di_x1 = 0.0, di_y1 = 0.0, di_x2 = 0.0, di_y2 = 0.0;
    if (iw > 0.0 && ih > 0.0) {
        if (pred.x1 >= gt.x1) di_x1 = -ih;
        if (pred.x2 <= gt.x2) di_x2 = ih;
        if (pred.y1 >= gt.y1) di_y1 = -iw;
        if (pred.y2 <= gt.y2) di_y2 = iw;
    }

    const double da_x1 = -pred.height();
    const double da_x2 = pred.height();
    const double da_y1 = -pred.width();
    const double da_y2 = pred.width();

    // L = 1 - inter/area  =>  dL/dc = (inter * dA/dc - area * dI/dc) / area^2.
    const double inv_area2 = 1.0 / (area * area);
    return {
        (inter * da_x1 - area * di_x1) * inv_area2,
        (inter * da_y1 - area * di_y1) * inv_area2,
        (inter * da_x2 - area * di_x2) * inv_area2,
        (inter * da_y2 - area * di_y2) * inv_area2,
    };
}

double batch_coverage_term(std::span<const CoveragePair> pairs,
                           const AlignmentConfig& cfg) {
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
        throw ValidationError("batch_coverage_term: lambda must be finite, >= 0");
    }
    if (cfg.lambda == 0.0) return 0.0;
    Vector losses;
    for (const CoveragePair& p : pairs) {
        if (p.gated) losses.push_back(coverage_loss(p.pred, p.gt));
    }
    if (losses.empty()) return 0.0;
    return cfg.lambda * pairwise_sum(losses) / static_cast<double>(losses.size());
}

}  // namespace camokit
