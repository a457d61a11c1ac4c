#pragma once

#include <vector>

#include "dkvkoga/matrix.hpp"

namespace dkv {

/// Per-row squared relative errors |s_i - y_i|^2 / |y_i|^2.
/// Throws ZeroNormTarget when some target row has zero norm.
std::vector<double> per_point_relative_errors(const Matrix& predictions, const Matrix& targets);

/// Mean of the per-point relative errors.
double relative_test_error(const Matrix& predictions, const Matrix& targets);

/// Relative error for a two-equation system: mean over both equations'
/// per-sample terms, i.e. 1/(2N) sum_n sum_j |u_j(n) - s_j(n)|^2 / |u_j(n)|^2.
double pode_relative_error(const Matrix& pred_eq1, const Matrix& target_eq1,
                           const Matrix& pred_eq2, const Matrix& target_eq2);

/// p in [0,1]; linear interpolation between closest ranks.
double percentile(std::vector<double> values, double p);

} // namespace dkv
