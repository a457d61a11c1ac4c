#include "dkvkoga/greedy.hpp"

#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/linalg.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv {

void GreedyConfig::validate() const {
    if (n_max < 1) throw std::invalid_argument("greedy config: n_max must be >= 1");
    if (f_tol < 0.0) throw std::invalid_argument("greedy config: f_tol must be nonnegative");
    if (!(stability_tol > 0.0)) {
        throw std::invalid_argument("greedy config: stability_tol must be positive");
    }
    if (gamma < 0.0) throw std::invalid_argument("greedy config: gamma must be nonnegative");
}

const ScalarKernel& outer_kernel(const SurrogateKernel& kernel) {
    if (const auto* shallow = std::get_if<ScalarKernel>(&kernel)) return *shallow;
    return std::get<DeepKernelModel>(kernel).arch.outer;
}

Matrix kernel_features(const SurrogateKernel& kernel, const Matrix& x) {
    if (std::holds_alternative<ScalarKernel>(kernel)) return x;
    const auto& deep = std::get<DeepKernelModel>(kernel);
    return propagate_features(deep.arch, deep.params, x);
}

namespace {

// Solves (L L^T) X = B on the leading n x n block of a larger factor buffer.
Matrix solve_leading_block(const Matrix& lower, std::size_t n, const Matrix& b) {
    const auto& ops = simd::active();
    Matrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = lower(i, k);
            if (lik != 0.0) ops.axpy(-lik, x.row(k), x.row(i), x.cols());
        }
        ops.scal(1.0 / lower(i, i), x.row(i), x.cols());
    }
    for (std::size_t ip = n; ip-- > 0;) {
        ops.scal(1.0 / lower(ip, ip), x.row(ip), x.cols());
        for (std::size_t k = 0; k < ip; ++k) {
            const double lik = lower(ip, k);
            if (lik != 0.0) ops.axpy(-lik, x.row(ip), x.row(k), x.cols());
        }
    }
    return x;
}

} // namespace

GreedyResult fit_greedy(const SurrogateKernel& kernel, const Matrix& x_train,
                        const Matrix& y_train, const GreedyConfig& cfg) {
    cfg.validate();
    const std::size_t n_cand = x_train.rows();
    const std::size_t m = y_train.cols();
    if (n_cand == 0) throw EmptyTrainingSet("fit_greedy: no candidates");
    if (y_train.rows() != n_cand) throw DimensionMismatch("fit_greedy: target rows differ");

    const ScalarKernel outer = outer_kernel(kernel);
    const Matrix features = kernel_features(kernel, x_train);
    const std::size_t df = features.cols();
    const auto& ops = simd::active();

    const std::size_t cap = std::min(cfg.n_max, n_cand);
    Matrix lower(cap, cap);          // bordered Cholesky factor of K_S + gamma I
    Matrix kernel_cols(cap, n_cand); // row l = k(selected_l, every candidate)
    Matrix coef(0, m);
    std::vector<std::size_t> selected;
    std::vector<bool> unavailable(n_cand, false); // selected or permanently rejected
    std::vector<double> history;
    std::vector<double> res_norm(n_cand);
    Matrix residual = y_train;

    bool stop = false;
    while (!stop && selected.size() < cap) {
        for (std::size_t i = 0; i < n_cand; ++i) {
            res_norm[i] = std::sqrt(ops.sumsq(residual.row(i), m));
        }

        bool accepted = false;
        while (!accepted && !stop) {
            std::size_t best = n_cand;
            double best_norm = -1.0;
            for (std::size_t i = 0; i < n_cand; ++i) {
                if (!unavailable[i] && res_norm[i] > best_norm) {
                    best_norm = res_norm[i];
                    best = i;
                }
            }
            if (best == n_cand || best_norm < cfg.f_tol) {
                stop = true;
                break;
            }

            // Bordered update: L w = b, new pivot^2 = k(x,x) + gamma - |w|^2.
            const std::size_t n = selected.size();
            std::vector<double> w(n);
            for (std::size_t l = 0; l < n; ++l) {
                double s = kernel_cols(l, best);
                for (std::size_t t = 0; t < l; ++t) s -= lower(l, t) * w[t];
                w[l] = s / lower(l, l);
            }
            const double diag = kernel_from_sqdist(outer, 0.0) + cfg.gamma;
            const double pivot2 = diag - ops.sumsq(w.data(), n);
            if (pivot2 < cfg.stability_tol * cfg.stability_tol) {
                if (n == 0) throw DegenerateKernel("fit_greedy: first pivot below stability_tol");
                unavailable[best] = true; // pivots only shrink as the set grows
                continue;
            }

            history.push_back(best_norm);
            unavailable[best] = true;
            for (std::size_t t = 0; t < n; ++t) lower(n, t) = w[t];
            lower(n, n) = std::sqrt(pivot2);
            for (std::size_t i = 0; i < n_cand; ++i) {
                kernel_cols(n, i) =
                    kernel_from_sqdist(outer, ops.sqdist(features.row(best), features.row(i), df));
            }
            selected.push_back(best);
            accepted = true;
        }
        if (!accepted) break;

        // Re-solve (K_S + gamma I) C = Y_S with the extended factor, then
        // refresh every candidate residual.
        const std::size_t n = selected.size();
        Matrix rhs(n, m);
        for (std::size_t l = 0; l < n; ++l) {
            for (std::size_t c = 0; c < m; ++c) rhs(l, c) = y_train(selected[l], c);
        }
        coef = solve_leading_block(lower, n, rhs);
        residual = y_train;
        for (std::size_t l = 0; l < n; ++l) {
            for (std::size_t i = 0; i < n_cand; ++i) {
                const double klc = kernel_cols(l, i);
                if (klc != 0.0) ops.axpy(-klc, coef.row(l), residual.row(i), m);
            }
        }
    }

    GreedyResult result;
    result.residual_history = std::move(history);
    result.model.kernel = kernel;
    result.model.gamma = cfg.gamma;
    result.model.out_dim = m;
    result.model.coefficients = std::move(coef);
    result.model.centers = Matrix(selected.size(), x_train.cols());
    for (std::size_t l = 0; l < selected.size(); ++l) {
        for (std::size_t c = 0; c < x_train.cols(); ++c) {
            result.model.centers(l, c) = x_train(selected[l], c);
        }
    }
    return result;
}

Matrix predict(const SurrogateModel& model, const Matrix& x) {
    if (model.centers.rows() == 0) return Matrix(x.rows(), model.out_dim);
    const Matrix fx = kernel_features(model.kernel, x);
    const Matrix fc = kernel_features(model.kernel, model.centers);
    const Matrix g = gram(outer_kernel(model.kernel), fx, fc);
    return matmul(g, model.coefficients);
}

std::vector<double> residual_norms(const SurrogateModel& model, const Matrix& x, const Matrix& y) {
    if (y.rows() != x.rows()) throw DimensionMismatch("residual_norms: row counts differ");
    if (y.cols() != model.out_dim) throw DimensionMismatch("residual_norms: target width differs");
    const Matrix pred = predict(model, x);
    std::vector<double> norms(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        norms[i] = std::sqrt(simd::active().sqdist(y.row(i), pred.row(i), y.cols()));
    }
    return norms;
}

} // namespace dkv
