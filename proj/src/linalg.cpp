#include "dkvkoga/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv {

namespace {

// In-place attempt; returns false on a non-positive pivot.
bool try_factor(const Matrix& a, double jitter, Matrix& lower) {
    const std::size_t n = a.rows();
    const auto& ops = simd::active();
    lower = Matrix(n, n);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(a(i, i)) + jitter);
    const double pivot_floor = std::max(max_diag, 1.0) * n * std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double s = ops.dot(lower.row(i), lower.row(j), j);
            if (j == i) {
                const double d = a(i, i) + jitter - s;
                if (!(d > pivot_floor)) return false;
                lower(i, i) = std::sqrt(d);
            } else {
                lower(i, j) = (a(i, j) - s) / lower(j, j);
            }
        }
    }
    return true;
}

} // namespace

CholeskyFactor cholesky(const Matrix& a, double max_jitter) {
    if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: matrix not square");
    Matrix lower;
    if (try_factor(a, 0.0, lower)) return {std::move(lower), 0.0};
    for (double jitter = 1e-12; jitter <= max_jitter * (1.0 + 1e-15); jitter *= 10.0) {
        if (try_factor(a, jitter, lower)) return {std::move(lower), jitter};
    }
    throw NotPositiveDefinite("cholesky: not positive definite within jitter budget");
}

Matrix CholeskyFactor::solve_lower(const Matrix& b) const {
    const std::size_t n = dim();
    if (b.rows() != n) throw DimensionMismatch("cholesky solve: rhs rows differ from dim");
    const auto& ops = simd::active();
    Matrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = lower_(i, k);
            if (lik != 0.0) ops.axpy(-lik, x.row(k), x.row(i), x.cols());
        }
        ops.scal(1.0 / lower_(i, i), x.row(i), x.cols());
    }
    return x;
}

Matrix CholeskyFactor::solve(const Matrix& b) const {
    const std::size_t n = dim();
    if (b.rows() != n) throw DimensionMismatch("cholesky solve: rhs rows differ from dim");
    const auto& ops = simd::active();
    Matrix x = solve_lower(b);
    // Back substitution with L^T.
    for (std::size_t ip = n; ip-- > 0;) {
        ops.scal(1.0 / lower_(ip, ip), x.row(ip), x.cols());
        for (std::size_t k = 0; k < ip; ++k) {
            const double lik = lower_(ip, k);
            if (lik != 0.0) ops.axpy(-lik, x.row(ip), x.row(k), x.cols());
        }
    }
    return x;
}

Matrix CholeskyFactor::lower_inverse() const {
    const std::size_t n = dim();
    const auto& ops = simd::active();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double inv_lii = 1.0 / lower_(i, i);
        // Row i of L^{-1} solves L(i,:) M = e_i over rows above it.
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = lower_(i, k);
            if (lik != 0.0) ops.axpy(-lik, m.row(k), m.row(i), k + 1);
        }
        ops.scal(inv_lii, m.row(i), i);
        m(i, i) = inv_lii;
    }
    return m;
}

std::vector<double> CholeskyFactor::inverse_diagonal() const {
    const std::size_t n = dim();
    const Matrix m = lower_inverse();
    // (A^{-1})_{jj} = sum_k (L^{-1})_{kj}^2.
    std::vector<double> diag(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j <= k; ++j) diag[j] += m(k, j) * m(k, j);
    }
    return diag;
}

SymmetricEigen jacobi_eigh(const Matrix& a, int max_sweeps) {
    if (a.rows() != a.cols()) throw DimensionMismatch("jacobi_eigh: matrix not square");
    const std::size_t n = a.rows();
    Matrix m = a;
    Matrix v = Matrix::identity(n);
    const double scale = std::max(frobenius_norm(a), 1e-300);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        }
        if (std::sqrt(off) <= 1e-14 * scale) {
            SymmetricEigen out;
            out.values.resize(n);
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t x, std::size_t y) { return m(x, x) > m(y, y); });
            out.vectors = Matrix(n, n);
            for (std::size_t j = 0; j < n; ++j) {
                out.values[j] = m(order[j], order[j]);
                for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
            }
            return out;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    throw ConvergenceFailure("jacobi_eigh: sweep cap reached");
}

TruncatedSvd truncated_svd(const Matrix& z, std::size_t r) {
    const std::size_t rows = z.rows(), cols = z.cols();
    if (r > std::min(rows, cols)) throw DimensionMismatch("truncated_svd: r exceeds min(rows, cols)");
    TruncatedSvd out;
    if (r == 0) {
        out.u = Matrix(rows, 0);
        return out;
    }
    if (rows >= cols) {
        // Gram route on z^T z; left vectors recovered as z v / sigma.
        const SymmetricEigen eig = jacobi_eigh(matmul_tn(z, z));
        out.sigma.resize(r);
        out.u = Matrix(rows, r);
        for (std::size_t j = 0; j < r; ++j) {
            const double sigma = std::sqrt(std::max(eig.values[j], 0.0));
            out.sigma[j] = sigma;
            if (sigma > 0.0) {
                for (std::size_t i = 0; i < rows; ++i) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < cols; ++k) acc += z(i, k) * eig.vectors(k, j);
                    out.u(i, j) = acc / sigma;
                }
            }
        }
    } else {
        const SymmetricEigen eig = jacobi_eigh(matmul_nt(z, z));
        out.sigma.resize(r);
        out.u = Matrix(rows, r);
        for (std::size_t j = 0; j < r; ++j) {
            out.sigma[j] = std::sqrt(std::max(eig.values[j], 0.0));
            for (std::size_t i = 0; i < rows; ++i) out.u(i, j) = eig.vectors(i, j);
        }
    }
    return out;
}

std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         const std::vector<double>& theta, double h) {
    std::vector<double> grad(theta.size());
    std::vector<double> probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const double fp = f(probe);
        probe[i] = theta[i] - h;
        const double fm = f(probe);
        probe[i] = theta[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

} // namespace dkv
