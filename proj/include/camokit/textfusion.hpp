#pragma once

#include <optional>
#include <string>
#include <vector>

#include "camokit/numerics.hpp"
#include "camokit/rng.hpp"

namespace camokit {

/// K sub-description embeddings for one class, one row per phrase.
/// Rows are unit-normalized at ingestion.
struct SubDescriptionSet {
    int class_id = 0;
    std::vector<std::string> labels;
    Matrix embeddings;  // K x D
};

/// Builds a set and normalizes every row; a zero row is rejected.
SubDescriptionSet make_subdescription_set(int class_id,
                                          std::vector<std::string> labels,
                                          Matrix embeddings);

enum class Activation { Identity, Sigmoid, Tanh };

/// Three affine layers D -> H -> H -> D; the hidden nonlinearity is
/// configurable, the output layer is linear.
struct AdapterParams {
    Matrix w1;  // H x D
    Vector b1;
    Matrix w2;  // H x H
    Vector b2;
    Matrix w3;  // D x H
    Vector b3;
    Activation hidden_activation = Activation::Sigmoid;

    static AdapterParams identity(std::size_t dim);
    static AdapterParams random(std::size_t dim, std::size_t hidden,
                                CounterRng& rng, double scale = 0.5);
};

struct AdapterGradients {
    Matrix w1, w2, w3;
    Vector b1, b2, b3;
    Vector input;
};

Vector adapter_forward(const AdapterParams& params, std::span<const double> t);

/// Applies the adapter to each row independently.
Matrix adapter_forward_rows(const AdapterParams& params, const Matrix& rows);

/// Backprop of `grad_out` (dLoss/dOutput) through the adapter at input `t`.
AdapterGradients adapter_backward(const AdapterParams& params,
                                  std::span<const double> t,
                                  std::span<const double> grad_out);

struct FusionWeights {
    Vector raw_scores;  // w_k: similarity-to-region minus similarity-to-image-mean
    Vector normalized;  // beta_k: softmax of raw scores, sums to 1
    bool degenerate = false;
};

struct FusedClassEmbedding {
    int class_id = 0;
    Vector vector;
    bool degenerate = false;
};

/// Rank-limited denoising of the sub-description matrix: rows are centered,
/// reconstructed from the top clamp(K, r_min, r_max) principal directions,
/// and re-shifted. Sets with fewer than r_min rows pass through unchanged.
Matrix decorrelate(const SubDescriptionSet& set, std::size_t r_max = 10,
                   std::size_t r_min = 3);

/// Per-row importance of each refined sub-description: how much better it
/// matches the candidate region than the image-average embedding.
FusionWeights contrastive_weights(std::span<const double> v_region,
                                  std::span<const double> v_global,
                                  const Matrix& refined);

/// Weighted sum of refined rows with the softmax weights.
FusedClassEmbedding fuse_contrastive(const FusionWeights& weights,
                                     const Matrix& refined, int class_id = 0);

struct GramSchmidtResult {
    Matrix rows;                    // orthonormal rows, in acceptance order
    std::vector<std::size_t> kept;  // source row index per accepted row
};

/// Row-order Gram-Schmidt; rows whose residual norm falls below `tol`
/// (duplicates, linear combinations) are dropped.
GramSchmidtResult gram_schmidt_rows(const Matrix& rows, double tol = 1e-10);

/// Orthogonal fusion variant: orthonormalize rows, then combine with uniform
/// weights, or with contrastive weights re-normalized over the kept rows.
FusedClassEmbedding fuse_orthogonal(const Matrix& refined,
                                    const FusionWeights* weights = nullptr,
                                    int class_id = 0);

/// Baseline fusion: sum the raw sub-description vectors and L2-normalize.
FusedClassEmbedding fuse_sum_normalize(const SubDescriptionSet& set);

}  // namespace camokit
