#pragma once

#include <span>
#include <string>

#include "dkvkoga/matrix.hpp"

namespace dkv {

enum class KernelFamily { gaussian, matern1, matern2 };

/// Radial basis kernel: family plus shape parameter epsilon > 0.
///   gaussian  exp(-eps^2 r^2)
///   matern1   (1 + eps r) exp(-eps r)
///   matern2   (1 + eps r + eps^2 r^2 / 3) exp(-eps r)
struct ScalarKernel {
    KernelFamily family = KernelFamily::gaussian;
    double epsilon = 1.0;
};

std::string family_name(KernelFamily family);
KernelFamily family_from_name(const std::string& name);

/// Kernel value from the squared distance; the sqrt needed by the Matern
/// families clamps tiny negative round-off to zero.
double kernel_from_sqdist(const ScalarKernel& k, double r2);
/// Kernel value from the distance r >= 0.
double kernel_from_dist(const ScalarKernel& k, double r);
/// phi'(r)/r, the radial slope divided by r. All three families have a
/// removable singularity at r = 0; the closed forms below avoid the division
/// so derivative code never sees 0/0:
///   gaussian  -2 eps^2 exp(-eps^2 r^2)
///   matern1   -eps^2 exp(-eps r)
///   matern2   -(eps^2/3)(1 + eps r) exp(-eps r)
double kernel_slope_over_r(const ScalarKernel& k, double r);

struct KernelValueSlope {
    double value;
    double slope_over_r;
};

/// Value and phi'(r)/r together, sharing the single exp evaluation.
KernelValueSlope kernel_value_and_slope(const ScalarKernel& k, double r2);

double eval_kernel(const ScalarKernel& k, std::span<const double> x, std::span<const double> y);

/// Gram matrix (k(x_i, y_j))_{ij} for row-point matrices.
Matrix gram(const ScalarKernel& k, const Matrix& x, const Matrix& y);
/// Symmetric Gram matrix for one point set; the strict lower triangle is
/// mirrored, so the result is exactly symmetric.
Matrix gram(const ScalarKernel& k, const Matrix& x);

} // namespace dkv
