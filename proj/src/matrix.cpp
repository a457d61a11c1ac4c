#include "dkvkoga/matrix.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dkvkoga/simd.hpp"

namespace dkv {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionMismatch("matrix buffer size does not match rows*cols");
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionMismatch("ragged row in matrix literal");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    m.require_finite("matrix literal");
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(std::span<const double> v) {
    Matrix m(v.size(), 1);
    std::memcpy(m.data(), v.data(), v.size() * sizeof(double));
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Matrix::require_finite(const char* what) const {
    if (!all_finite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
}

Matrix Matrix::row_block(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw DimensionMismatch("row_block out of range");
    Matrix b(count, cols_);
    std::memcpy(b.data(), row(first), count * cols_ * sizeof(double));
    return b;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: inner dimensions differ");
    const auto& ops = simd::active();
    Matrix c(a.rows(), b.cols());
    // i-k-j order: the inner update is an axpy over contiguous rows.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik != 0.0) ops.axpy(aik, b.row(k), c.row(i), b.cols());
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionMismatch("matmul_nt: inner dimensions differ");
    const auto& ops = simd::active();
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            c(i, j) = ops.dot(a.row(i), b.row(j), a.cols());
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("matmul_tn: inner dimensions differ");
    const auto& ops = simd::active();
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            if (aki != 0.0) ops.axpy(aki, b.row(k), c.row(i), b.cols());
        }
    }
    return c;
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch(what);
}
} // namespace

Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "matrix add: shape mismatch");
    Matrix c = a;
    simd::active().axpy(1.0, b.data(), c.data(), c.size());
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "matrix sub: shape mismatch");
    Matrix c = a;
    simd::active().axpy(-1.0, b.data(), c.data(), c.size());
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    simd::active().scal(s, c.data(), c.size());
    return c;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "matrix add: shape mismatch");
    simd::active().axpy(1.0, b.data(), a.data(), a.size());
    return a;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard: shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

void add_scaled_identity(Matrix& a, double s) {
    if (a.rows() != a.cols()) throw DimensionMismatch("add_scaled_identity: not square");
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += s;
}

double frobenius_norm(const Matrix& a) {
    return std::sqrt(simd::active().sumsq(a.data(), a.size()));
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.data()[i]));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace dkv
