#pragma once

#include <functional>
#include <vector>

#include "dkvkoga/matrix.hpp"

namespace dkv {

/// Lower-triangular Cholesky factor of an SPD matrix, possibly after adding
/// jitter*I to rescue a semi-definite input.
class CholeskyFactor {
public:
    CholeskyFactor(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

    const Matrix& lower() const { return lower_; }
    double jitter_applied() const { return jitter_; }
    std::size_t dim() const { return lower_.rows(); }

    /// X with (L L^T) X = B; B may carry multiple right-hand sides.
    Matrix solve(const Matrix& b) const;
    /// L y = b (forward substitution).
    Matrix solve_lower(const Matrix& b) const;
    /// Diagonal of (L L^T)^{-1}, via the inverse of the triangular factor;
    /// the dense inverse is never formed.
    std::vector<double> inverse_diagonal() const;
    /// L^{-1} (lower triangular).
    Matrix lower_inverse() const;

private:
    Matrix lower_;
    double jitter_;
};

/// Factors a symmetric matrix, escalating jitter from 1e-12 by factors of 10
/// up to max_jitter when a pivot fails. Throws NotPositiveDefinite when every
/// jitter level fails.
CholeskyFactor cholesky(const Matrix& a, double max_jitter = 1e-6);

struct SymmetricEigen {
    std::vector<double> values; // descending
    Matrix vectors;             // column j pairs with values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Throws ConvergenceFailure when the sweep cap is reached.
SymmetricEigen jacobi_eigh(const Matrix& a, int max_sweeps = 64);

struct TruncatedSvd {
    Matrix u;                  // leading r left singular vectors, one per column
    std::vector<double> sigma; // nonincreasing, nonnegative
};

/// Leading r singular pairs of z, computed through the eigendecomposition of
/// the smaller Gram matrix (z^T z or z z^T). Suited to very tall or very wide
/// matrices such as flattened voxel stacks.
TruncatedSvd truncated_svd(const Matrix& z, std::size_t r);

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h.
std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         const std::vector<double>& theta, double h);

} // namespace dkv
