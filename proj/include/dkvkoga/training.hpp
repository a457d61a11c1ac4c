#pragma once

#include <cstdint>
#include <vector>

#include "dkvkoga/dataset.hpp"
#include "dkvkoga/deepkernel.hpp"
#include "dkvkoga/kernels.hpp"
#include "dkvkoga/matrix.hpp"

namespace dkv {

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 100;
    double gamma_rippa = 1e-3; // regularization inside the LOO loss
    double lr = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Mean batch loss per epoch.
using LossHistory = std::vector<double>;

struct LooResult {
    double loss = 0.0;
    Matrix errors; // B x m, rows e_j = s_{-j}(x_j) - y_j
};

/// Leave-one-out errors of the regularized kernel interpolant on a batch via
/// Rippa's shortcut: with a solving (K + gamma I) a = y and q = diag of the
/// inverse, row j of the error is -a_j / q_j. One factorization serves the
/// whole batch. Loss is mean squared row norm.
LooResult rippa_loss(const Matrix& features, const Matrix& targets, const ScalarKernel& outer,
                     double gamma);

/// Definitional leave-one-out: refits the interpolant on the batch minus each
/// point in turn. Independent of the shortcut; used as its oracle.
LooResult loo_brute_force(const Matrix& features, const Matrix& targets, const ScalarKernel& outer,
                          double gamma);

/// Rippa loss as a tape node on propagated batch features.
ad::Var rippa_loss_var(TapeModel& model, const Matrix& targets, const ScalarKernel& outer,
                       double gamma);

/// Bias-corrected Adam moments for one parameter matrix.
struct AdamMoments {
    Matrix m;
    Matrix v;
};

struct AdamState {
    std::vector<AdamMoments> w;
    std::vector<AdamMoments> a;
    long step = 0;

    static AdamState zeros_like(const DeepKernelParams& params);
};

/// Single Adam update of one parameter matrix with step counter t >= 1.
void adam_update(Matrix& theta, const Matrix& grad, AdamMoments& moments, long t,
                 const TrainConfig& cfg);

/// Updates every trainable matrix in params from grads; advances state.step.
void adam_step(DeepKernelParams& params, const ParamGradients& grads, AdamState& state,
               const TrainConfig& cfg);

/// Contiguous (start, count) batch ranges over n shuffled points. A final
/// range shorter than 2 merges into the previous one so every batch supports
/// leave-one-out.
std::vector<std::pair<std::size_t, std::size_t>> batch_partition(std::size_t n,
                                                                 std::size_t batch_size);

struct TrainResult {
    DeepKernelParams params;
    LossHistory history;
};

/// Stage-one optimization: initializes parameters from cfg.seed, then runs
/// epochs of shuffled disjoint batches minimizing the Rippa loss with Adam.
/// A final short batch (< 2 points) is merged into the previous one.
TrainResult train_deep_kernel(const Dataset& data, const DeepKernelArchitecture& arch,
                              const TrainConfig& cfg);

} // namespace dkv
