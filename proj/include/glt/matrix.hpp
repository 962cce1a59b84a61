#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "glt/error.hpp"

namespace glt {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. All numeric state in the library
// (speed series, masks, weights, gradients) lives in this type.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Matrix& m) {
    return all_finite(std::span<const double>{m.data(), m.size()});
}

inline bool is_symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (m(i, j) != m(j, i)) return false;
    return true;
}

// y = M x
inline Vector matvec(const Matrix& m, std::span<const double> x) {
    require(x.size() == m.cols(), Errc::shape_mismatch, "matvec width mismatch");
    Vector y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

// out += M^T d
inline void matvec_transpose_add(const Matrix& m, std::span<const double> d,
                                 std::span<double> out) {
    require(d.size() == m.rows() && out.size() == m.cols(), Errc::shape_mismatch,
            "matvec_transpose_add shape mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double di = d[i];
        if (di == 0.0) continue;
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * di;
    }
}

// M += a b^T
inline void outer_add(Matrix& m, std::span<const double> a, std::span<const double> b) {
    require(a.size() == m.rows() && b.size() == m.cols(), Errc::shape_mismatch,
            "outer_add shape mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += ai * b[j];
    }
}

}  // namespace glt
