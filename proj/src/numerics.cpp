#include "camokit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace camokit {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
    if (rows * cols != data.size()) {
        throw ValidationError("matrix: rows*cols != data length");
    }
}

Matrix Matrix::transposed() const {
    Matrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            t.at(c, r) = at(r, c);
        }
    }
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
}

double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ValidationError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw ValidationError("cosine: dimension mismatch");
    constexpr double kEps = 1e-12;
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu <= kEps || nv <= kEps) {
        throw DegenerateInputError("cosine: zero-norm input");
    }
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

Vector softmax(std::span<const double> w) {
    if (w.empty()) throw ValidationError("softmax: empty input");
    if (!all_finite(w)) throw ValidationError("softmax: non-finite input");
    const double m = *std::max_element(w.begin(), w.end());
    Vector out(w.size());
    double z = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = std::exp(w[i] - m);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

Vector finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                        std::span<const double> x, double h) {
    if (h <= 0.0) throw ValidationError("finite_diff_grad: h must be > 0");
    Vector probe(x.begin(), x.end());
    Vector grad(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double fp = f(probe);
        probe[i] = orig - h;
        const double fm = f(probe);
        probe[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

namespace {

// One-sided Jacobi on a matrix with rows >= cols: rotates column pairs until
// all columns are mutually orthogonal, then reads off sigma = column norms.
void jacobi_orthogonalize(Matrix& w, Matrix& v) {
    const std::size_t n = w.cols;
    const std::size_t m = w.rows;
    constexpr double kTol = 1e-14;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w.at(i, p);
                    const double wq = w.at(i, q);
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if (std::abs(apq) <= kTol * std::sqrt(app * aqq) || apq == 0.0) {
                    continue;
                }
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = std::copysign(1.0, zeta) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w.at(i, p);
                    const double wq = w.at(i, q);
                    w.at(i, p) = cs * wp - sn * wq;
                    w.at(i, q) = sn * wp + cs * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v.at(i, p);
                    const double vq = v.at(i, q);
                    v.at(i, p) = cs * vp - sn * vq;
                    v.at(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

SvdResult svd_tall(const Matrix& a) {
    Matrix w = a;
    Matrix v(a.cols, a.cols);
    for (std::size_t i = 0; i < a.cols; ++i) v.at(i, i) = 1.0;
    jacobi_orthogonalize(w, v);

    const std::size_t n = a.cols;
    Vector sigma(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) s += w.at(i, j) * w.at(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    SvdResult out;
    out.sigma.resize(n);
    out.u = Matrix(a.rows, n);
    out.v = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = sigma[src];
        const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (std::size_t i = 0; i < a.rows; ++i) {
            out.u.at(i, j) = w.at(i, src) * inv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out.v.at(i, j) = v.at(i, src);
        }
    }
    return out;
}

}  // namespace

SvdResult svd_decompose(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw ValidationError("svd: empty matrix");
    if (!all_finite(a.data)) throw ValidationError("svd: non-finite input");
    if (a.rows >= a.cols) return svd_tall(a);
    SvdResult t = svd_tall(a.transposed());
    return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

Matrix svd_truncate(const Matrix& t, std::size_t r) {
    if (r < 1) throw ValidationError("svd_truncate: rank must be >= 1");
    if (t.rows == 0) throw ValidationError("svd_truncate: empty matrix");
    if (!all_finite(t.data)) throw ValidationError("svd_truncate: non-finite input");

    Vector mean(t.cols, 0.0);
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = 0; j < t.cols; ++j) mean[j] += t.at(i, j);
    }
    for (double& m : mean) m /= static_cast<double>(t.rows);

    Matrix centered(t.rows, t.cols);
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = 0; j < t.cols; ++j) {
            centered.at(i, j) = t.at(i, j) - mean[j];
        }
    }

    // A fully centered-away matrix (identical rows) reconstructs as the mean.
    if (centered.frobenius_norm() == 0.0) return t;

    const SvdResult svd = svd_decompose(centered);
    const std::size_t keep = std::min(r, svd.sigma.size());

    Matrix out(t.rows, t.cols);
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = 0; j < t.cols; ++j) out.at(i, j) = mean[j];
    }
    for (std::size_t k = 0; k < keep; ++k) {
        const double s = svd.sigma[k];
        if (s == 0.0) break;
        for (std::size_t i = 0; i < t.rows; ++i) {
            const double us = svd.u.at(i, k) * s;
            for (std::size_t j = 0; j < t.cols; ++j) {
                out.at(i, j) += us * svd.v.at(j, k);
            }
        }
    }
    return out;
}

namespace vec {

Vector scaled(std::span<const double> v, double s) {
    Vector out(v.begin(), v.end());
    for (double& x : out) x *= s;
    return out;
}

Vector normalized(std::span<const double> v) {
    const double n = norm(v);
    if (n <= 1e-12) throw DegenerateInputError("normalize: zero-norm vector");
    return scaled(v, 1.0 / n);
}

void add_inplace(Vector& acc, std::span<const double> v, double scale) {
    if (acc.size() != v.size()) throw ValidationError("add: dimension mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += scale * v[i];
}

}  // namespace vec

}  // namespace camokit
