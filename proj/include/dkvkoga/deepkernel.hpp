#pragma once

#include <functional>
#include <vector>

#include "dkvkoga/autodiff.hpp"
#include "dkvkoga/kernels.hpp"
#include "dkvkoga/matrix.hpp"
#include "dkvkoga/rng.hpp"

namespace dkv {

/// Multilayer kernel: layers 1..L-1 alternate bias-free linear maps (odd)
/// and componentwise kernel activations (even), and layer L applies the
/// outer radial kernel to the propagated feature vectors. L = 1 denotes a
/// shallow kernel with no feature map.
struct DeepKernelArchitecture {
    std::size_t layers = 2;          // L: even, or 1 for shallow
    std::vector<std::size_t> dims;   // d_0 .. d_{L-1}
    std::size_t center_count = 50;   // M, first-layer centers
    ScalarKernel activation;         // shared by all even inner layers
    ScalarKernel outer;              // layer L
    std::size_t out_dim = 1;         // m

    std::size_t input_dim() const { return dims.front(); }
    std::size_t feature_dim() const { return dims.back(); }
    bool shallow() const { return layers == 1; }
    void validate() const;

    /// Uniform-width architecture: every hidden dimension equals `hidden`.
    static DeepKernelArchitecture uniform(std::size_t layers, std::size_t input_dim,
                                          std::size_t hidden, std::size_t center_count,
                                          ScalarKernel activation, ScalarKernel outer,
                                          std::size_t out_dim);
};

/// Trainable matrices plus the fixed first-layer centers. w[k] is the weight
/// of odd layer 2k+1 (shape d_{2k+1} x d_{2k}); a[k] the coefficients of
/// even layer 2k+2 (shape d_{2k+2} x M). z1 is fixed before training.
struct DeepKernelParams {
    std::vector<Matrix> w;
    std::vector<Matrix> a;
    Matrix z1; // M x d_0

    std::size_t trainable_count() const { return w.size() + a.size(); }
};

/// Z1 drawn without replacement from the training inputs; weights uniform in
/// (-s, s) with s = 1/sqrt(fan-in). Throws TooFewTrainingPoints when the
/// inputs cannot supply M distinct rows.
DeepKernelParams init_params(const DeepKernelArchitecture& arch, const Matrix& train_inputs,
                             SeededRng& rng);

struct PropagateResult {
    Matrix features;                  // n x d_{L-1}
    std::vector<Matrix> layer_outputs; // output of layers 1..L-1
    std::vector<Matrix> centers;       // centers of layers 1..L-1 (M x d_{l-1})
};

/// Applies layers 1..L-1 to the rows of x. Centers for every layer are the
/// images of z1 under the preceding layers, recomputed from the current
/// parameters through the same code path as the features.
PropagateResult propagate(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                          const Matrix& x);

/// Features only, without per-layer captures.
Matrix propagate_features(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                          const Matrix& x);

double deep_kernel_eval(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                        std::span<const double> x, std::span<const double> y);

/// Tape-backed propagation: trainable matrices become leaves so that any
/// scalar loss built on `features` differentiates back to them.
struct TapeModel {
    ad::Tape tape;
    std::vector<ad::Var> w;
    std::vector<ad::Var> a;
    ad::Var features;
};

TapeModel propagate_tape(const DeepKernelArchitecture& arch, const DeepKernelParams& params,
                         const Matrix& batch);

/// Gradients in the same layout as DeepKernelParams (z1 is not trainable).
struct ParamGradients {
    std::vector<Matrix> w;
    std::vector<Matrix> a;
};

/// Builds the loss with `loss_of` on a fresh tape and returns its exact
/// reverse-mode gradient along with the loss value.
std::pair<double, ParamGradients> loss_gradient(
    const DeepKernelArchitecture& arch, const DeepKernelParams& params, const Matrix& batch,
    const std::function<ad::Var(TapeModel&)>& loss_of);

} // namespace dkv
