#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dkvkoga/deepkernel.hpp"
#include "dkvkoga/errors.hpp"
#include "dkvkoga/linalg.hpp"
#include "dkvkoga/training.hpp"
#include "oracles.hpp"

using namespace dkv;

namespace {

const ScalarKernel kGauss1{KernelFamily::gaussian, 1.0};

DeepKernelArchitecture small_arch(std::size_t layers, std::size_t input_dim, std::size_t hidden,
                                  std::size_t centers) {
    return DeepKernelArchitecture::uniform(layers, input_dim, hidden, centers, kGauss1, kGauss1, 1);
}

std::vector<double> flatten_params(const DeepKernelParams& p) {
    std::vector<double> flat;
    for (const Matrix& w : p.w) flat.insert(flat.end(), w.data(), w.data() + w.size());
    for (const Matrix& a : p.a) flat.insert(flat.end(), a.data(), a.data() + a.size());
    return flat;
}

void unflatten_params(DeepKernelParams& p, const std::vector<double>& flat) {
    std::size_t k = 0;
    for (Matrix& w : p.w) {
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = flat[k++];
    }
    for (Matrix& a : p.a) {
        for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = flat[k++];
    }
}

} // namespace

TEST_CASE("init_params draws centers from the inputs and respects bounds") {
    SeededRng rng(10);
    const Matrix inputs = oracle::random_matrix(rng, 6, 2);

    SUBCASE("M equal to the row count permutes the inputs") {
        const auto arch = small_arch(2, 2, 3, 6);
        SeededRng r1(3);
        const auto params = init_params(arch, inputs, r1);
        REQUIRE(params.z1.rows() == 6);
        // Every input row appears exactly once.
        std::vector<bool> used(6, false);
        for (std::size_t i = 0; i < 6; ++i) {
            bool matched = false;
            for (std::size_t j = 0; j < 6 && !matched; ++j) {
                if (!used[j] && params.z1.row_copy(i) == inputs.row_copy(j)) {
                    used[j] = true;
                    matched = true;
                }
            }
            CHECK(matched);
        }
    }

    SUBCASE("same seed reproduces parameters bit for bit") {
        const auto arch = small_arch(4, 2, 3, 4);
        SeededRng r1(77), r2(77);
        const auto p1 = init_params(arch, inputs, r1);
        const auto p2 = init_params(arch, inputs, r2);
        CHECK(flatten_params(p1) == flatten_params(p2));
        CHECK(p1.z1 == p2.z1);
    }

    SUBCASE("1x1 weight respects the fan-in bound") {
        const auto arch = small_arch(2, 1, 1, 2);
        Matrix one_d(5, 1);
        for (std::size_t i = 0; i < 5; ++i) one_d(i, 0) = 0.1 * static_cast<double>(i);
        SeededRng r(8);
        const auto params = init_params(arch, one_d, r);
        REQUIRE(params.w.size() == 1);
        CHECK(std::fabs(params.w[0](0, 0)) <= 1.0);
    }

    SUBCASE("too few training rows throws") {
        const auto arch = small_arch(2, 2, 3, 50);
        SeededRng r(1);
        CHECK_THROWS_AS(init_params(arch, inputs, r), TooFewTrainingPoints);
    }
}

TEST_CASE("two-layer propagation is a plain linear map") {
    SeededRng rng(20);
    const auto arch = small_arch(2, 3, 4, 2);
    const Matrix inputs = oracle::random_matrix(rng, 5, 3);
    SeededRng r(2);
    const auto params = init_params(arch, inputs, r);
    const auto result = propagate(arch, params, inputs);
    CHECK(max_abs_diff(result.features, matmul_nt(inputs, params.w[0])) == 0.0);
}

TEST_CASE("zero activation coefficients zero the features") {
    SeededRng rng(21);
    const auto arch = small_arch(4, 2, 3, 4);
    const Matrix inputs = oracle::random_matrix(rng, 5, 2);
    SeededRng r(3);
    auto params = init_params(arch, inputs, r);
    params.a[0] = Matrix(params.a[0].rows(), params.a[0].cols());
    const auto result = propagate(arch, params, inputs);
    CHECK(max_abs(result.layer_outputs[1]) == 0.0);
    CHECK(max_abs(result.features) == 0.0);
}

TEST_CASE("one-dimensional four-layer chain matches a hand trace") {
    DeepKernelArchitecture arch;
    arch.layers = 4;
    arch.dims = {1, 1, 1, 1};
    arch.center_count = 1;
    arch.activation = {KernelFamily::gaussian, 1.3};
    arch.outer = kGauss1;
    arch.out_dim = 1;
    arch.validate();

    DeepKernelParams params;
    params.w.push_back(Matrix::from_rows({{0.7}}));  // W1
    params.w.push_back(Matrix::from_rows({{-1.4}})); // W3
    params.a.push_back(Matrix::from_rows({{0.9}}));  // A2
    params.z1 = Matrix::from_rows({{0.4}});

    const double x = -0.25;
    const auto result = propagate(arch, params, Matrix::from_rows({{x}}));

    const double z1_img = 0.7 * 0.4;
    const double x_img = 0.7 * x;
    const double act = kernel_from_dist(arch.activation, std::fabs(x_img - z1_img)) * 0.9;
    const double expected = -1.4 * act;
    CHECK(result.features(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("deep kernel eval properties") {
    SeededRng rng(30);
    const auto arch = small_arch(4, 2, 3, 5);
    const Matrix inputs = oracle::random_matrix(rng, 8, 2);
    SeededRng r(4);
    const auto params = init_params(arch, inputs, r);

    std::vector<double> x{0.3, -0.2}, y{1.0, 0.4};
    CHECK(deep_kernel_eval(arch, params, x, x) == 1.0);
    CHECK(deep_kernel_eval(arch, params, x, y) == deep_kernel_eval(arch, params, y, x));
}

TEST_CASE("two-layer kernel with scaled identity weight reduces to the shallow Gaussian") {
    DeepKernelArchitecture arch;
    arch.layers = 2;
    arch.dims = {2, 2};
    arch.center_count = 1;
    arch.activation = kGauss1;
    arch.outer = kGauss1; // shape 1 on the propagated features
    arch.out_dim = 1;

    const double eps = 1.7;
    DeepKernelParams params;
    params.w.push_back(Matrix::from_rows({{eps, 0.0}, {0.0, eps}}));
    params.z1 = Matrix::from_rows({{0.0, 0.0}});

    const ScalarKernel shallow{KernelFamily::gaussian, eps};
    SeededRng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        std::vector<double> y{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        CHECK(deep_kernel_eval(arch, params, x, y) ==
              doctest::Approx(eval_kernel(shallow, x, y)).epsilon(1e-14));
    }
}

TEST_CASE("deep gram matrices stay positive semi-definite") {
    SeededRng rng(32);
    for (std::size_t layers : {2ul, 4ul}) {
        const auto arch = small_arch(layers, 2, 3, 4);
        const Matrix inputs = oracle::random_matrix(rng, 8, 2);
        SeededRng r(layers);
        const auto params = init_params(arch, inputs, r);
        const Matrix f = propagate_features(arch, params, inputs);
        const auto eig = jacobi_eigh(gram(arch.outer, f));
        CHECK(eig.values.back() >= -1e-9);
    }
}

TEST_CASE("center propagation shares the feature code path bit for bit") {
    SeededRng rng(33);
    const auto arch = small_arch(6, 2, 3, 4);
    const Matrix inputs = oracle::random_matrix(rng, 10, 2);
    SeededRng r(6);
    const auto params = init_params(arch, inputs, r);

    const auto through_layers = propagate(arch, params, params.z1);
    for (std::size_t l = 1; l < arch.layers - 1; ++l) {
        // Centers of layer l+1 are the layer-l outputs of z1.
        CHECK(through_layers.centers[l] == through_layers.layer_outputs[l - 1]);
    }
}

TEST_CASE("duplicate propagated components give singular activation blocks") {
    // Two points equal in component 0 and different in component 1: the
    // per-component kernel matrix of component 0 is the all-ones 2x2 with a
    // zero eigenvalue.
    const ScalarKernel k{KernelFamily::gaussian, 1.0};
    const Matrix pts = Matrix::from_rows({{0.6}, {0.6}});
    const auto eig = jacobi_eigh(gram(k, pts));
    CHECK(eig.values.back() == doctest::Approx(0.0).epsilon(1e-14).scale(1.0));
    CHECK(eig.values.front() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("loss gradients match central finite differences") {
    SeededRng rng(34);
    const auto arch = small_arch(4, 3, 3, 5);
    const Matrix batch = oracle::random_matrix(rng, 8, 3);
    Matrix targets(8, 1);
    for (std::size_t i = 0; i < 8; ++i) targets(i, 0) = std::sin(batch(i, 0)) + batch(i, 1);
    SeededRng r(9);
    auto params = init_params(arch, batch, r);

    const auto builder = [&](TapeModel& model) {
        return rippa_loss_var(model, targets, arch.outer, 1e-3);
    };
    const auto [loss, grads] = loss_gradient(arch, params, batch, builder);
    CHECK(loss > 0.0);

    std::vector<double> flat_grad;
    for (const Matrix& g : grads.w) flat_grad.insert(flat_grad.end(), g.data(), g.data() + g.size());
    for (const Matrix& g : grads.a) flat_grad.insert(flat_grad.end(), g.data(), g.data() + g.size());

    const std::vector<double> theta = flatten_params(params);
    const auto loss_at = [&](const std::vector<double>& t) {
        DeepKernelParams probe = params;
        unflatten_params(probe, t);
        TapeModel model = propagate_tape(arch, probe, batch);
        const ad::Var l = rippa_loss_var(model, targets, arch.outer, 1e-3);
        return model.tape.value(l)(0, 0);
    };
    const auto fd = finite_diff_gradient(loss_at, theta, 1e-5);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        num += (flat_grad[i] - fd[i]) * (flat_grad[i] - fd[i]);
        den += fd[i] * fd[i];
    }
    CHECK(std::sqrt(num) / std::sqrt(den) < 1e-4);
}

TEST_CASE("frobenius loss of W1 has gradient 2 W1") {
    SeededRng rng(36);
    const auto arch = small_arch(4, 2, 3, 4);
    const Matrix inputs = oracle::random_matrix(rng, 6, 2);
    SeededRng r(12);
    const auto params = init_params(arch, inputs, r);

    const auto [loss, grads] = loss_gradient(arch, params, inputs, [](TapeModel& model) {
        return model.tape.sum_squares(model.w[0]);
    });
    CHECK(loss == doctest::Approx(frobenius_norm(params.w[0]) * frobenius_norm(params.w[0]))
                      .epsilon(1e-12));
    CHECK(max_abs_diff(grads.w[0], 2.0 * params.w[0]) == 0.0);
    CHECK(max_abs(grads.w[1]) == 0.0);
    CHECK(max_abs(grads.a[0]) == 0.0);
}

TEST_CASE("constant loss has zero gradient everywhere") {
    SeededRng rng(37);
    const auto arch = small_arch(4, 2, 2, 3);
    const Matrix inputs = oracle::random_matrix(rng, 5, 2);
    SeededRng r(13);
    const auto params = init_params(arch, inputs, r);
    const auto [loss, grads] = loss_gradient(arch, params, inputs, [](TapeModel& model) {
        Matrix c(1, 1);
        c(0, 0) = 4.2;
        return model.tape.constant(c);
    });
    CHECK(loss == 4.2);
    for (const Matrix& g : grads.w) CHECK(max_abs(g) == 0.0);
    for (const Matrix& g : grads.a) CHECK(max_abs(g) == 0.0);
}
