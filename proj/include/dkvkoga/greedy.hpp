#pragma once

#include <variant>
#include <vector>

#include "dkvkoga/deepkernel.hpp"
#include "dkvkoga/kernels.hpp"
#include "dkvkoga/matrix.hpp"

namespace dkv {

/// Fixed deep kernel: architecture plus trained parameters.
struct DeepKernelModel {
    DeepKernelArchitecture arch;
    DeepKernelParams params;
};

using SurrogateKernel = std::variant<ScalarKernel, DeepKernelModel>;

const ScalarKernel& outer_kernel(const SurrogateKernel& kernel);
/// Propagated features for deep kernels; pass-through for shallow ones.
Matrix kernel_features(const SurrogateKernel& kernel, const Matrix& x);

/// Sparse kernel expansion: n selected centers with an n x m coefficient
/// block. With gamma = 0 the expansion interpolates the training targets at
/// the centers.
struct SurrogateModel {
    SurrogateKernel kernel;
    Matrix centers;      // n x d_0, original input space
    Matrix coefficients; // n x m
    double gamma = 0.0;
    std::size_t out_dim = 1;
};

struct GreedyConfig {
    std::size_t n_max = 50;
    double f_tol = 0.0;          // stop when the max residual drops below
    double stability_tol = 1e-10; // reject candidates with a smaller new pivot
    double gamma = 0.0;

    void validate() const;
};

struct GreedyResult {
    SurrogateModel model;
    std::vector<double> residual_history; // max residual norm before each pick
};

/// f-greedy selection: repeatedly picks the candidate with the largest
/// residual norm (ties to the lowest index; the first pick maximizes the
/// target norm), extends a bordered Cholesky factor of K + gamma I by one
/// row, and re-solves the coefficients. Candidates whose new pivot falls
/// below stability_tol are skipped for good. Deep-kernel features for all
/// candidates are propagated once up front.
GreedyResult fit_greedy(const SurrogateKernel& kernel, const Matrix& x_train,
                        const Matrix& y_train, const GreedyConfig& cfg);

/// Rows of x mapped through the kernel expansion; p x m.
Matrix predict(const SurrogateModel& model, const Matrix& x);

/// Euclidean norm of y_i - predict(model, x_i) per row.
std::vector<double> residual_norms(const SurrogateModel& model, const Matrix& x, const Matrix& y);

} // namespace dkv
