#include "dkvkoga/kernels.hpp"

#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv {

std::string family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::matern1: return "matern1";
        case KernelFamily::matern2: return "matern2";
    }
    return "gaussian";
}

KernelFamily family_from_name(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "matern1") return KernelFamily::matern1;
    if (name == "matern2") return KernelFamily::matern2;
    throw SchemaError("unknown kernel family: " + name);
}

double kernel_from_sqdist(const ScalarKernel& k, double r2) {
    const double eps = k.epsilon;
    switch (k.family) {
        case KernelFamily::gaussian:
            return std::exp(-eps * eps * r2);
        case KernelFamily::matern1: {
            const double er = eps * std::sqrt(std::max(r2, 0.0));
            return (1.0 + er) * std::exp(-er);
        }
        case KernelFamily::matern2: {
            const double er = eps * std::sqrt(std::max(r2, 0.0));
            return (1.0 + er + er * er / 3.0) * std::exp(-er);
        }
    }
    return 0.0;
}

double kernel_from_dist(const ScalarKernel& k, double r) {
    return kernel_from_sqdist(k, r * r);
}

double kernel_slope_over_r(const ScalarKernel& k, double r) {
    const double eps = k.epsilon;
    switch (k.family) {
        case KernelFamily::gaussian:
            return -2.0 * eps * eps * std::exp(-eps * eps * r * r);
        case KernelFamily::matern1:
            return -eps * eps * std::exp(-eps * r);
        case KernelFamily::matern2:
            return -(eps * eps / 3.0) * (1.0 + eps * r) * std::exp(-eps * r);
    }
    return 0.0;
}

KernelValueSlope kernel_value_and_slope(const ScalarKernel& k, double r2) {
    const double eps = k.epsilon;
    switch (k.family) {
        case KernelFamily::gaussian: {
            const double e = std::exp(-eps * eps * r2);
            return {e, -2.0 * eps * eps * e};
        }
        case KernelFamily::matern1: {
            const double er = eps * std::sqrt(std::max(r2, 0.0));
            const double e = std::exp(-er);
            return {(1.0 + er) * e, -eps * eps * e};
        }
        case KernelFamily::matern2: {
            const double er = eps * std::sqrt(std::max(r2, 0.0));
            const double e = std::exp(-er);
            return {(1.0 + er + er * er / 3.0) * e, -(eps * eps / 3.0) * (1.0 + er) * e};
        }
    }
    return {0.0, 0.0};
}

double eval_kernel(const ScalarKernel& k, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionMismatch("eval_kernel: point dimensions differ");
    return kernel_from_sqdist(k, simd::active().sqdist(x.data(), y.data(), x.size()));
}

Matrix gram(const ScalarKernel& k, const Matrix& x, const Matrix& y) {
    if (x.cols() != y.cols()) throw DimensionMismatch("gram: point dimensions differ");
    const auto& ops = simd::active();
    Matrix g(x.rows(), y.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < y.rows(); ++j) {
            g(i, j) = kernel_from_sqdist(k, ops.sqdist(x.row(i), y.row(j), x.cols()));
        }
    }
    return g;
}

Matrix gram(const ScalarKernel& k, const Matrix& x) {
    const auto& ops = simd::active();
    const std::size_t n = x.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        g(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double v = kernel_from_sqdist(k, ops.sqdist(x.row(i), x.row(j), x.cols()));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

} // namespace dkv
