#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "dkvkoga/errors.hpp"

namespace dkv {

/// Dense row-major matrix of doubles. All kernel matrices, datasets and
/// trainable parameters in this project are small enough (a few thousand
/// rows) that a single contiguous buffer is the right representation.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Builds from nested braces; validates that every entry is finite.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    /// Single-column matrix holding v.
    static Matrix column(std::span<const double> v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

    bool all_finite() const;
    /// Throws std::invalid_argument when any entry is NaN/Inf.
    void require_finite(const char* what) const;

    Matrix transposed() const;
    Matrix row_block(std::size_t first, std::size_t count) const;
    std::vector<double> row_copy(std::size_t i) const { return {row(i), row(i) + cols_}; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix& operator+=(Matrix& a, const Matrix& b);

Matrix hadamard(const Matrix& a, const Matrix& b);
void add_scaled_identity(Matrix& a, double s);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace dkv
