#pragma once

#include <functional>
#include <span>
#include <vector>

#include "camokit/common.hpp"

namespace camokit {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit reals. Small and value-semantic; the
/// fusion stack never needs more than a few hundred rows.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data).subspan(r * cols, cols);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data).subspan(r * cols, cols);
    }

    Matrix transposed() const;
    double frobenius_norm() const;
};

/// Thin SVD A = U * diag(sigma) * V^T with singular values sorted descending.
/// U is rows x k, V is cols x k, k = min(rows, cols).
struct SvdResult {
    Matrix u;
    Vector sigma;
    Matrix v;
};

/// One-sided Jacobi SVD. Intended for the small matrices this project works
/// with (K sub-descriptions by embedding dim); converges to machine precision.
SvdResult svd_decompose(const Matrix& a);

/// Center rows by the mean row, project onto the top min(r, rank) right
/// singular directions, reconstruct, add the mean back. Shape is preserved.
Matrix svd_truncate(const Matrix& t, std::size_t r);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);

/// Cosine similarity; both inputs must have norm > 1e-12.
double cosine(std::span<const double> u, std::span<const double> v);

/// Numerically stable softmax (max subtraction).
Vector softmax(std::span<const double> w);

/// Central-difference gradient of a scalar function, one coordinate at a time.
Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h = 1e-6);

namespace vec {
Vector scaled(std::span<const double> v, double s);
Vector normalized(std::span<const double> v);
void add_inplace(Vector& acc, std::span<const double> v, double scale = 1.0);
}  // namespace vec

}  // namespace camokit
