#include "dkvkoga/training.hpp"

#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/linalg.hpp"
#include "dkvkoga/rng.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv {

void TrainConfig::validate() const {
    if (batch_size < 2) throw std::invalid_argument("train config: batch size must be >= 2");
    if (!(lr > 0.0)) throw std::invalid_argument("train config: learning rate must be positive");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
        throw std::invalid_argument("train config: betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw std::invalid_argument("train config: adam eps must be positive");
    if (gamma_rippa < 0.0) throw std::invalid_argument("train config: gamma must be nonnegative");
}

namespace {

void check_loo_input(const Matrix& features, const Matrix& targets) {
    if (features.rows() < 2) throw std::invalid_argument("loo: batch must hold at least 2 points");
    if (targets.rows() != features.rows()) {
        throw DimensionMismatch("loo: target rows differ from batch size");
    }
}

} // namespace

LooResult rippa_loss(const Matrix& features, const Matrix& targets, const ScalarKernel& outer,
                     double gamma) {
    check_loo_input(features, targets);
    const std::size_t b = features.rows();
    Matrix k = gram(outer, features);
    add_scaled_identity(k, gamma);
    const CholeskyFactor factor = cholesky(k);
    const Matrix a = factor.solve(targets);
    const std::vector<double> q = factor.inverse_diagonal();

    LooResult out;
    out.errors = a;
    for (std::size_t j = 0; j < b; ++j) {
        simd::active().scal(-1.0 / q[j], out.errors.row(j), out.errors.cols());
    }
    out.loss = simd::active().sumsq(out.errors.data(), out.errors.size()) / static_cast<double>(b);
    return out;
}

LooResult loo_brute_force(const Matrix& features, const Matrix& targets, const ScalarKernel& outer,
                          double gamma) {
    check_loo_input(features, targets);
    const std::size_t b = features.rows();
    const std::size_t m = targets.cols();

    LooResult out;
    out.errors = Matrix(b, m);
    for (std::size_t j = 0; j < b; ++j) {
        Matrix sub_x(b - 1, features.cols());
        Matrix sub_y(b - 1, m);
        std::size_t r = 0;
        for (std::size_t i = 0; i < b; ++i) {
            if (i == j) continue;
            for (std::size_t c = 0; c < features.cols(); ++c) sub_x(r, c) = features(i, c);
            for (std::size_t c = 0; c < m; ++c) sub_y(r, c) = targets(i, c);
            ++r;
        }
        Matrix k = gram(outer, sub_x);
        add_scaled_identity(k, gamma);
        const Matrix alpha = cholesky(k).solve(sub_y);
        // s(x_j) - y_j from the interpolant on the remaining points.
        const Matrix kj = gram(outer, features.row_block(j, 1), sub_x); // 1 x (b-1)
        const Matrix pred = matmul(kj, alpha);                          // 1 x m
        for (std::size_t c = 0; c < m; ++c) out.errors(j, c) = pred(0, c) - targets(j, c);
    }
    out.loss = simd::active().sumsq(out.errors.data(), out.errors.size()) / static_cast<double>(b);
    return out;
}

ad::Var rippa_loss_var(TapeModel& model, const Matrix& targets, const ScalarKernel& outer,
                       double gamma) {
    const std::size_t b = targets.rows();
    if (b < 2) throw std::invalid_argument("loo: batch must hold at least 2 points");
    ad::Tape& tape = model.tape;
    const ad::Var kg = tape.add_scaled_identity(tape.gram(model.features, outer), gamma);
    const ad::Var a = tape.spd_solve(kg, tape.constant(targets));
    const ad::Var q = tape.inverse_diagonal(kg);
    const ad::Var errors = tape.rowwise_divide(a, q);
    return tape.scale(tape.sum_squares(errors), 1.0 / static_cast<double>(b));
}

AdamState AdamState::zeros_like(const DeepKernelParams& params) {
    AdamState state;
    for (const Matrix& w : params.w) state.w.push_back({Matrix(w.rows(), w.cols()), Matrix(w.rows(), w.cols())});
    for (const Matrix& a : params.a) state.a.push_back({Matrix(a.rows(), a.cols()), Matrix(a.rows(), a.cols())});
    return state;
}

void adam_update(Matrix& theta, const Matrix& grad, AdamMoments& moments, long t,
                 const TrainConfig& cfg) {
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad.data()[i];
        double& m = moments.m.data()[i];
        double& v = moments.v.data()[i];
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double mhat = m / corr1;
        const double vhat = v / corr2;
        theta.data()[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

void adam_step(DeepKernelParams& params, const ParamGradients& grads, AdamState& state,
               const TrainConfig& cfg) {
    ++state.step;
    for (std::size_t i = 0; i < params.w.size(); ++i) {
        adam_update(params.w[i], grads.w[i], state.w[i], state.step, cfg);
    }
    for (std::size_t i = 0; i < params.a.size(); ++i) {
        adam_update(params.a[i], grads.a[i], state.a[i], state.step, cfg);
    }
}

std::vector<std::pair<std::size_t, std::size_t>> batch_partition(std::size_t n,
                                                                 std::size_t batch_size) {
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        batches.emplace_back(start, std::min(n - start, batch_size));
    }
    if (batches.size() > 1 && batches.back().second < 2) {
        batches.pop_back();
        batches.back().second = n - batches.back().first;
    }
    return batches;
}

TrainResult train_deep_kernel(const Dataset& data, const DeepKernelArchitecture& arch,
                              const TrainConfig& cfg) {
    cfg.validate();
    arch.validate();
    if (arch.shallow()) {
        throw std::invalid_argument("train_deep_kernel: shallow kernel has no trainable layers");
    }
    if (data.size() < cfg.batch_size) {
        throw TooFewTrainingPoints("train_deep_kernel: dataset smaller than one batch");
    }

    SeededRng rng(cfg.seed);
    TrainResult result;
    result.params = init_params(arch, data.x, rng);

    AdamState adam = AdamState::zeros_like(result.params);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        const auto batches = batch_partition(order.size(), cfg.batch_size);

        double epoch_loss = 0.0;
        for (const auto& [start, count] : batches) {
            Matrix bx(count, data.input_dim());
            Matrix by(count, data.output_dim());
            for (std::size_t r = 0; r < count; ++r) {
                const std::size_t src = order[start + r];
                for (std::size_t c = 0; c < bx.cols(); ++c) bx(r, c) = data.x(src, c);
                for (std::size_t c = 0; c < by.cols(); ++c) by(r, c) = data.y(src, c);
            }
            const auto [loss, grads] = loss_gradient(
                arch, result.params, bx, [&](TapeModel& model) {
                    return rippa_loss_var(model, by, arch.outer, cfg.gamma_rippa);
                });
            adam_step(result.params, grads, adam, cfg);
            epoch_loss += loss;
        }
        result.history.push_back(epoch_loss / static_cast<double>(batches.size()));
    }
    return result;
}

} // namespace dkv
