#include "dkvkoga/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv {

std::vector<double> per_point_relative_errors(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw DimensionMismatch("relative errors: prediction shape differs from targets");
    }
    if (targets.rows() == 0) throw EmptyTrainingSet("relative errors: no test points");
    const auto& ops = simd::active();
    std::vector<double> errors(targets.rows());
    for (std::size_t i = 0; i < targets.rows(); ++i) {
        const double norm2 = ops.sumsq(targets.row(i), targets.cols());
        if (norm2 == 0.0) throw ZeroNormTarget("relative errors: zero-norm target row");
        errors[i] = ops.sqdist(predictions.row(i), targets.row(i), targets.cols()) / norm2;
    }
    return errors;
}

double relative_test_error(const Matrix& predictions, const Matrix& targets) {
    const auto errors = per_point_relative_errors(predictions, targets);
    double sum = 0.0;
    for (double e : errors) sum += e;
    return sum / static_cast<double>(errors.size());
}

double pode_relative_error(const Matrix& pred_eq1, const Matrix& target_eq1,
                           const Matrix& pred_eq2, const Matrix& target_eq2) {
    const double e1 = relative_test_error(pred_eq1, target_eq1);
    const double e2 = relative_test_error(pred_eq2, target_eq2);
    return 0.5 * (e1 + e2);
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double rank = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

} // namespace dkv
