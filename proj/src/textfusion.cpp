#include "camokit/textfusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace camokit {

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

double activate_deriv(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::Sigmoid: return sigmoid_deriv(x);
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 1.0;
}

Vector affine(const Matrix& w, const Vector& b, std::span<const double> x) {
    if (w.cols != x.size() || w.rows != b.size()) {
        throw ValidationError("adapter: layer dimension mismatch");
    }
    Vector y(b);
    for (std::size_t r = 0; r < w.rows; ++r) {
        y[r] += dot(w.row(r), x);
    }
    return y;
}

}  // namespace

SubDescriptionSet make_subdescription_set(int class_id,
                                          std::vector<std::string> labels,
                                          Matrix embeddings) {
    if (embeddings.rows < 1) {
        throw ValidationError("sub-description set: needs at least one row");
    }
    if (!labels.empty() && labels.size() != embeddings.rows) {
        throw ValidationError("sub-description set: label count != row count");
    }
    if (!all_finite(embeddings.data)) {
        throw ValidationError("sub-description set: non-finite embedding");
    }
    for (std::size_t k = 0; k < embeddings.rows; ++k) {
        auto row = embeddings.row(k);
        const double n = norm(row);
        if (n <= 1e-12) {
            throw ValidationError("sub-description set: zero-norm row " +
                                  std::to_string(k));
        }
        for (double& v : row) v /= n;
    }
    return SubDescriptionSet{class_id, std::move(labels), std::move(embeddings)};
}

AdapterParams AdapterParams::identity(std::size_t dim) {
    AdapterParams p;
    p.w1 = Matrix(dim, dim);
    p.w2 = Matrix(dim, dim);
    p.w3 = Matrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        p.w1.at(i, i) = 1.0;
        p.w2.at(i, i) = 1.0;
        p.w3.at(i, i) = 1.0;
    }
    p.b1.assign(dim, 0.0);
    p.b2.assign(dim, 0.0);
    p.b3.assign(dim, 0.0);
    p.hidden_activation = Activation::Identity;
    return p;
}

AdapterParams AdapterParams::random(std::size_t dim, std::size_t hidden,
                                    CounterRng& rng, double scale) {
    auto fill = [&](Matrix& m, std::size_t rows, std::size_t cols) {
        m = Matrix(rows, cols);
        for (double& v : m.data) v = scale * rng.next_gaussian();
    };
    AdapterParams p;
    fill(p.w1, hidden, dim);
    fill(p.w2, hidden, hidden);
    fill(p.w3, dim, hidden);
    p.b1 = rng.gaussian_vector(hidden, scale);
    p.b2 = rng.gaussian_vector(hidden, scale);
    p.b3 = rng.gaussian_vector(dim, scale);
    p.hidden_activation = Activation::Sigmoid;
    return p;
}

Vector adapter_forward(const AdapterParams& params, std::span<const double> t) {
    Vector a1 = affine(params.w1, params.b1, t);
    for (double& v : a1) v = activate(params.hidden_activation, v);
    Vector a2 = affine(params.w2, params.b2, a1);
    for (double& v : a2) v = activate(params.hidden_activation, v);
    return affine(params.w3, params.b3, a2);
}

Matrix adapter_forward_rows(const AdapterParams& params, const Matrix& rows) {
    Matrix out(rows.rows, params.w3.rows);
    for (std::size_t k = 0; k < rows.rows; ++k) {
        Vector y = adapter_forward(params, rows.row(k));
        std::copy(y.begin(), y.end(), out.row(k).begin());
    }
    return out;
}

AdapterGradients adapter_backward(const AdapterParams& params,
                                  std::span<const double> t,
                                  std::span<const double> grad_out) {
    const Activation act = params.hidden_activation;

    Vector a1 = affine(params.w1, params.b1, t);
    Vector h1(a1.size());
    for (std::size_t i = 0; i < a1.size(); ++i) h1[i] = activate(act, a1[i]);
    Vector a2 = affine(params.w2, params.b2, h1);
    Vector h2(a2.size());
    for (std::size_t i = 0; i < a2.size(); ++i) h2[i] = activate(act, a2[i]);

    if (grad_out.size() != params.w3.rows) {
        throw ValidationError("adapter_backward: grad dimension mismatch");
    }

    AdapterGradients g;
    g.w3 = Matrix(params.w3.rows, params.w3.cols);
    g.b3.assign(grad_out.begin(), grad_out.end());
    Vector dh2(params.w3.cols, 0.0);
    for (std::size_t r = 0; r < params.w3.rows; ++r) {
        for (std::size_t c = 0; c < params.w3.cols; ++c) {
            g.w3.at(r, c) = grad_out[r] * h2[c];
            dh2[c] += params.w3.at(r, c) * grad_out[r];
        }
    }

    Vector da2(dh2.size());
    for (std::size_t i = 0; i < da2.size(); ++i) {
        da2[i] = dh2[i] * activate_deriv(act, a2[i]);
    }
    g.w2 = Matrix(params.w2.rows, params.w2.cols);
    g.b2 = da2;
    Vector dh1(params.w2.cols, 0.0);
    for (std::size_t r = 0; r < params.w2.rows; ++r) {
        for (std::size_t c = 0; c < params.w2.cols; ++c) {
            g.w2.at(r, c) = da2[r] * h1[c];
            dh1[c] += params.w2.at(r, c) * da2[r];
        }
    }

    Vector da1(dh1.size());
    for (std::size_t i = 0; i < da1.size(); ++i) {
        da1[i] = dh1[i] * activate_deriv(act, a1[i]);
    }
    g.w1 = Matrix(params.w1.rows, params.w1.cols);
    g.b1 = da1;
    g.input.assign(params.w1.cols, 0.0);
    for (std::size_t r = 0; r < params.w1.rows; ++r) {
        for (std::size_t c = 0; c < params.w1.cols; ++c) {
            g.w1.at(r, c) = da1[r] * t[c];
            g.input[c] += params.w1.at(r, c) * da1[r];
        }
    }
    return g;
}

Matrix decorrelate(const SubDescriptionSet& set, std::size_t r_max,
                   std::size_t r_min) {
    if (r_min < 1 || r_min > r_max) {
        throw ValidationError("decorrelate: need 1 <= r_min <= r_max");
    }
    const std::size_t k = set.embeddings.rows;
    if (k < r_min) return set.embeddings;
    return svd_truncate(set.embeddings, std::clamp(k, r_min, r_max));
}

FusionWeights contrastive_weights(std::span<const double> v_region,
                                  std::span<const double> v_global,
                                  const Matrix& refined) {
    if (refined.cols != v_region.size() || refined.cols != v_global.size()) {
        throw ValidationError("contrastive_weights: dimension mismatch");
    }
    if (norm(v_region) <= 1e-12 || norm(v_global) <= 1e-12) {
        throw DegenerateInputError("contrastive_weights: zero-norm view vector");
    }

    FusionWeights out;
    out.raw_scores.assign(refined.rows, 0.0);
    std::vector<bool> bad(refined.rows, false);
    double min_valid = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < refined.rows; ++k) {
        const auto row = refined.row(k);
        if (norm(row) <= 1e-12) {
            bad[k] = true;
            out.degenerate = true;
            continue;
        }
        out.raw_scores[k] = cosine(v_region, row) - cosine(v_global, row);
        min_valid = std::min(min_valid, out.raw_scores[k]);
    }
    if (!std::isfinite(min_valid)) min_valid = 0.0;  // every row was degenerate
    for (std::size_t k = 0; k < refined.rows; ++k) {
        if (bad[k]) out.raw_scores[k] = min_valid;
    }
    out.normalized = softmax(out.raw_scores);
    return out;
}

FusedClassEmbedding fuse_contrastive(const FusionWeights& weights,
                                     const Matrix& refined, int class_id) {
    if (weights.normalized.size() != refined.rows) {
        throw ValidationError("fuse_contrastive: weight count != row count");
    }
    FusedClassEmbedding out;
    out.class_id = class_id;
    out.vector.assign(refined.cols, 0.0);
    for (std::size_t k = 0; k < refined.rows; ++k) {
        vec::add_inplace(out.vector, refined.row(k), weights.normalized[k]);
    }
    out.degenerate = norm(out.vector) < 1e-12;
    return out;
}

GramSchmidtResult gram_schmidt_rows(const Matrix& rows, double tol) {
    GramSchmidtResult result;
    std::vector<Vector> basis;
    for (std::size_t k = 0; k < rows.rows; ++k) {
        Vector r(rows.row(k).begin(), rows.row(k).end());
        for (const Vector& b : basis) {
            const double proj = dot(r, b);
            vec::add_inplace(r, b, -proj);
        }
        const double residual = norm(r);
        if (residual < tol) continue;
        for (double& v : r) v /= residual;
        basis.push_back(std::move(r));
        result.kept.push_back(k);
    }
    result.rows = Matrix(basis.size(), rows.cols);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        std::copy(basis[i].begin(), basis[i].end(), result.rows.row(i).begin());
    }
    return result;
}

FusedClassEmbedding fuse_orthogonal(const Matrix& refined,
                                    const FusionWeights* weights, int class_id) {
    if (refined.rows < 1) throw ValidationError("fuse_orthogonal: empty matrix");
    const GramSchmidtResult gs = gram_schmidt_rows(refined);
    if (gs.kept.empty()) {
        throw DegenerateInputError("fuse_orthogonal: all rows degenerate");
    }

    Vector beta(gs.kept.size(), 1.0 / static_cast<double>(gs.kept.size()));
    if (weights != nullptr) {
        if (weights->normalized.size() != refined.rows) {
            throw ValidationError("fuse_orthogonal: weight count != row count");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < gs.kept.size(); ++i) {
            beta[i] = weights->normalized[gs.kept[i]];
            total += beta[i];
        }
        for (double& b : beta) b /= total;  // softmax weights are positive
    }

    FusedClassEmbedding out;
    out.class_id = class_id;
    out.vector.assign(refined.cols, 0.0);
    for (std::size_t i = 0; i < gs.kept.size(); ++i) {
        vec::add_inplace(out.vector, gs.rows.row(i), beta[i]);
    }
    out.degenerate = norm(out.vector) < 1e-12;
    return out;
}

FusedClassEmbedding fuse_sum_normalize(const SubDescriptionSet& set) {
    if (set.embeddings.rows < 1) {
        throw ValidationError("fuse_sum_normalize: empty set");
    }
    Vector sum(set.embeddings.cols, 0.0);
    for (std::size_t k = 0; k < set.embeddings.rows; ++k) {
        vec::add_inplace(sum, set.embeddings.row(k));
    }
    const double n = norm(sum);
    if (n < 1e-12) {
        throw DegenerateInputError("fuse_sum_normalize: sub-descriptions cancel");
    }
    FusedClassEmbedding out;
    out.class_id = set.class_id;
    out.vector = vec::scaled(sum, 1.0 / n);
    return out;
}

}  // namespace camokit
