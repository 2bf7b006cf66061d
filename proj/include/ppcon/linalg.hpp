#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ppcon/errors.hpp"

namespace ppcon {

// Dense row-major matrix of doubles. Deliberately minimal: the networks
// handled here are desk-scale, so O(N^3) dense operations are fine.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const = default;

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    // (1/n) * ones
    static Matrix average_projector(std::size_t n) {
        return Matrix(n, n, 1.0 / static_cast<double>(n));
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product: inner dimensions differ");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t r = 0; r < a.rows_; ++r)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double v = a(r, k);
                if (v == 0.0) continue;
                for (std::size_t c = 0; c < b.cols_; ++c) out(r, c) += v * b(k, c);
            }
        return out;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw DimensionMismatch("matrix difference: shapes differ");
        Matrix out = a;
        for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
        return out;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        if (x.size() != cols_) throw DimensionMismatch("matrix apply: vector length differs");
        std::vector<double> y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
            y[r] = acc;
        }
        return y;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double mean(const std::vector<double>& a) {
    double acc = 0.0;
    for (double v : a) acc += v;
    return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

// Singular values and a minimum-norm least-squares solve via one-sided
// Jacobi: columns of a working copy of A are rotated until pairwise
// orthogonal, accumulating the rotations in V. Working on A directly
// (instead of forming A^T A) keeps small singular values accurate, which
// the rank decisions below depend on.
struct SvdResult {
    std::vector<double> singular_values; // descending
    Matrix u_scaled;                     // columns = U * Sigma (orthogonal columns)
    Matrix v;                            // right singular vectors
};

inline SvdResult jacobi_svd(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix g = a;
    Matrix v = Matrix::identity(n);

    if (m > 0) {
        const double eps = 1e-15;
        for (int sweep = 0; sweep < 60; ++sweep) {
            bool rotated = false;
            for (std::size_t p = 0; p + 1 < n; ++p) {
                for (std::size_t q = p + 1; q < n; ++q) {
                    double app = 0.0, aqq = 0.0, apq = 0.0;
                    for (std::size_t r = 0; r < m; ++r) {
                        app += g(r, p) * g(r, p);
                        aqq += g(r, q) * g(r, q);
                        apq += g(r, p) * g(r, q);
                    }
                    if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                    rotated = true;
                    const double zeta = (aqq - app) / (2.0 * apq);
                    const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                     (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                    const double c = 1.0 / std::sqrt(1.0 + t * t);
                    const double s = c * t;
                    for (std::size_t r = 0; r < m; ++r) {
                        const double gp = g(r, p), gq = g(r, q);
                        g(r, p) = c * gp - s * gq;
                        g(r, q) = s * gp + c * gq;
                    }
                    for (std::size_t r = 0; r < n; ++r) {
                        const double vp = v(r, p), vq = v(r, q);
                        v(r, p) = c * vp - s * vq;
                        v(r, q) = s * vp + c * vq;
                    }
                }
            }
            if (!rotated) break;
        }
    }

    std::vector<double> sigma(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += g(r, c) * g(r, c);
        sigma[c] = std::sqrt(s);
    }

    // Sort columns by descending singular value.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (sigma[order[j]] > sigma[order[i]]) std::swap(order[i], order[j]);

    SvdResult out;
    out.singular_values.resize(n);
    out.u_scaled = Matrix(m, n);
    out.v = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.singular_values[c] = sigma[order[c]];
        for (std::size_t r = 0; r < m; ++r) out.u_scaled(r, c) = g(r, order[c]);
        for (std::size_t r = 0; r < n; ++r) out.v(r, c) = v(r, order[c]);
    }
    return out;
}

// Numerical rank with a threshold relative to the largest singular value.
inline std::size_t numerical_rank(const std::vector<double>& sigma, double rel_tol) {
    double smax = 0.0;
    for (double s : sigma) smax = std::max(smax, s);
    if (smax == 0.0) return 0;
    std::size_t rank = 0;
    for (double s : sigma)
        if (s > rel_tol * smax) ++rank;
    return rank;
}

// Minimum-norm least-squares solution of A x = y from a precomputed SVD.
inline std::vector<double> min_norm_solve(const SvdResult& svd, const std::vector<double>& y,
                                          double rel_tol) {
    const std::size_t m = svd.u_scaled.rows(), n = svd.v.rows();
    double smax = 0.0;
    for (double s : svd.singular_values) smax = std::max(smax, s);
    std::vector<double> x(n, 0.0);
    for (std::size_t c = 0; c < svd.singular_values.size(); ++c) {
        const double s = svd.singular_values[c];
        if (smax == 0.0 || s <= rel_tol * smax) continue;
        // u_c = column c of u_scaled / s; coefficient = <u_c, y> / s.
        double uy = 0.0;
        for (std::size_t r = 0; r < m; ++r) uy += svd.u_scaled(r, c) * y[r];
        const double coef = uy / (s * s);
        for (std::size_t r = 0; r < n; ++r) x[r] += coef * svd.v(r, c);
    }
    return x;
}

} // namespace ppcon
