#include "dkvkoga/deepkernel.hpp"

#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/simd.hpp"

namespace dkv {

void DeepKernelArchitecture::validate() const {
    if (layers != 1 && layers % 2 != 0) {
        throw std::invalid_argument("deep kernel: layer count must be even or 1");
    }
    if (dims.size() != layers) {
        throw std::invalid_argument("deep kernel: dims must list d_0..d_{L-1}");
    }
    for (std::size_t d : dims) {
        if (d == 0) throw std::invalid_argument("deep kernel: zero layer width");
    }
    // Activation layers keep their width: d_l = d_{l-1} for even inner l.
    for (std::size_t l = 2; l + 1 < layers; l += 2) {
        if (dims[l] != dims[l - 1]) {
            throw std::invalid_argument("deep kernel: activation layer must preserve width");
        }
    }
    if (!shallow() && center_count == 0) {
        throw std::invalid_argument("deep kernel: center count must be positive");
    }
    if (out_dim == 0) throw std::invalid_argument("deep kernel: output dimension must be positive");
    if (activation.epsilon <= 0.0 || outer.epsilon <= 0.0) {
        throw std::invalid_argument("deep kernel: shape parameters must be positive");
    }
}

DeepKernelArchitecture DeepKernelArchitecture::uniform(std::size_t layers, std::size_t input_dim,
                                                       std::size_t hidden, std::size_t center_count,
                                                       ScalarKernel activation, ScalarKernel outer,
                                                       std::size_t out_dim) {
    DeepKernelArchitecture arch;
    arch.layers = layers;
    arch.dims.assign(std::max<std::size_t>(layers, 1), hidden);
    arch.dims[0] = input_dim;
    arch.center_count = center_count;
    arch.activation = activation;
    arch.outer = outer;
    arch.out_dim = out_dim;
    arch.validate();
    return arch;
}

DeepKernelParams init_params(const DeepKernelArchitecture& arch, const Matrix& train_inputs,
                             SeededRng& rng) {
    arch.validate();
    DeepKernelParams params;
    if (arch.shallow()) return params;
    if (train_inputs.rows() < arch.center_count) {
        throw TooFewTrainingPoints("init_params: fewer training rows than first-layer centers");
    }
    if (train_inputs.cols() != arch.input_dim()) {
        throw DimensionMismatch("init_params: training input width differs from d_0");
    }

    const auto picks = rng.sample_without_replacement(train_inputs.rows(), arch.center_count);
    params.z1 = Matrix(arch.center_count, arch.input_dim());
    for (std::size_t i = 0; i < picks.size(); ++i) {
        for (std::size_t j = 0; j < arch.input_dim(); ++j) {
            params.z1(i, j) = train_inputs(picks[i], j);
        }
    }

    for (std::size_t l = 1; l < arch.layers; ++l) {
        if (l % 2 == 1) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(arch.dims[l - 1]));
            Matrix w(arch.dims[l], arch.dims[l - 1]);
            for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
            params.w.push_back(std::move(w));
        } else {
            const double bound = 1.0 / std::sqrt(static_cast<double>(arch.center_count));
            Matrix a(arch.dims[l], arch.center_count);
            for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-bound, bound);
            params.a.push_back(std::move(a));
        }
    }
    return params;
}

namespace {

Matrix activation_apply(const ScalarKernel& kernel, const Matrix& z, const Matrix& centers,
                        const Matrix& coef) {
    const std::size_t rows = z.rows(), d = z.cols(), m = centers.rows();
    Matrix out(rows, d);
    for (std::size_t p = 0; p < rows; ++p) {
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double diff = z(p, j) - centers(i, j);
                acc += kernel_from_sqdist(kernel, diff * diff) * coef(j, i);
            }
            out(p, j) = acc;
        }
    }
    return out;
}

void check_propagate_input(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                           const Matrix& x) {
    if (x.cols() != arch.input_dim()) {
        throw DimensionMismatch("propagate: input width differs from d_0");
    }
    if (!arch.shallow() && params.z1.rows() != arch.center_count) {
        throw DimensionMismatch("propagate: z1 row count differs from M");
    }
}

} // namespace

PropagateResult propagate(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                          const Matrix& x) {
    check_propagate_input(arch, params, x);
    PropagateResult result;
    Matrix cur = x;
    Matrix centers = params.z1;
    std::size_t wi = 0, ai = 0;
    for (std::size_t l = 1; l < arch.layers; ++l) {
        result.centers.push_back(centers);
        if (l % 2 == 1) {
            cur = matmul_nt(cur, params.w[wi]);
            centers = matmul_nt(centers, params.w[wi]);
            ++wi;
        } else {
            Matrix next = activation_apply(arch.activation, cur, centers, params.a[ai]);
            Matrix next_centers = activation_apply(arch.activation, centers, centers, params.a[ai]);
            cur = std::move(next);
            centers = std::move(next_centers);
            ++ai;
        }
        result.layer_outputs.push_back(cur);
    }
    result.features = std::move(cur);
    return result;
}

Matrix propagate_features(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                          const Matrix& x) {
    if (arch.shallow()) {
        check_propagate_input(arch, params, x);
        return x;
    }
    return propagate(arch, params, x).features;
}

double deep_kernel_eval(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                        std::span<const double> x, std::span<const double> y) {
    if (x.size() != arch.input_dim() || y.size() != arch.input_dim()) {
        throw DimensionMismatch("deep_kernel_eval: point dimension differs from d_0");
    }
    Matrix pair(2, x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        pair(0, j) = x[j];
        pair(1, j) = y[j];
    }
    const Matrix f = propagate_features(arch, params, pair);
    return eval_kernel(arch.outer, f.row_span(0), f.row_span(1));
}

TapeModel propagate_tape(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                         const Matrix& batch) {
    check_propagate_input(arch, params, batch);
    TapeModel model;
    for (const Matrix& w : params.w) model.w.push_back(model.tape.leaf(w));
    for (const Matrix& a : params.a) model.a.push_back(model.tape.leaf(a));

    ad::Var cur = model.tape.constant(batch);
    ad::Var centers = arch.shallow() ? ad::Var{} : model.tape.constant(params.z1);
    std::size_t wi = 0, ai = 0;
    for (std::size_t l = 1; l < arch.layers; ++l) {
        if (l % 2 == 1) {
            cur = model.tape.matmul_nt(cur, model.w[wi]);
            centers = model.tape.matmul_nt(centers, model.w[wi]);
            ++wi;
        } else {
            const ad::Var next = model.tape.activation(cur, centers, model.a[ai], arch.activation);
            const ad::Var next_centers =
                model.tape.activation(centers, centers, model.a[ai], arch.activation);
            cur = next;
            centers = next_centers;
            ++ai;
        }
    }
    model.features = cur;
    return model;
}

std::pair<double, ParamGradients> loss_gradient(
    const DeepKernelArchitecture& arch, const DeepKernelParams& params, const Matrix& batch,
    const std::function<ad::Var(TapeModel&)>& loss_of) {
    TapeModel model = propagate_tape(arch, params, batch);
    const ad::Var loss = loss_of(model);
    model.tape.backward(loss);
    ParamGradients grads;
    for (ad::Var v : model.w) grads.w.push_back(model.tape.gradient(v));
    for (ad::Var v : model.a) grads.a.push_back(model.tape.gradient(v));
    return {model.tape.value(loss)(0, 0), std::move(grads)};
}

} // namespace dkv
