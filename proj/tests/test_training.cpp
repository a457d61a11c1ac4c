#include <doctest.h>

#include <cmath>

#include "dkvkoga/datagen.hpp"
#include "dkvkoga/errors.hpp"
#include "dkvkoga/training.hpp"
#include "oracles.hpp"

using namespace dkv;

namespace {

const ScalarKernel kGauss1{KernelFamily::gaussian, 1.0};

} // namespace

TEST_CASE("rippa shortcut reproduces the two-point leave-one-out by hand") {
    const Matrix features = Matrix::from_rows({{0.0}, {1.0}});
    const Matrix targets = Matrix::from_rows({{0.0}, {1.0}});
    const auto result = rippa_loss(features, targets, kGauss1, 0.0);

    const double inv_e = std::exp(-1.0);
    CHECK(result.errors(0, 0) == doctest::Approx(inv_e).epsilon(1e-12));   // 0.36788
    CHECK(result.errors(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(result.loss == doctest::Approx((inv_e * inv_e + 1.0) / 2.0).epsilon(1e-12));
    CHECK(result.loss == doctest::Approx(0.56767).epsilon(1e-4));

    const auto brute = loo_brute_force(features, targets, kGauss1, 0.0);
    CHECK(brute.errors(0, 0) == doctest::Approx(inv_e).epsilon(1e-12));
    CHECK(brute.errors(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(brute.loss == doctest::Approx(result.loss).epsilon(1e-12));
}

TEST_CASE("zero targets give zero loss and zero errors") {
    SeededRng rng(50);
    const Matrix features = oracle::random_matrix(rng, 5, 2);
    const Matrix targets(5, 3);
    const auto result = rippa_loss(features, targets, kGauss1, 1e-3);
    CHECK(result.loss == 0.0);
    CHECK(max_abs(result.errors) == 0.0);
}

TEST_CASE("rippa equals brute force on random batches") {
    SeededRng rng(51);
    for (KernelFamily family : {KernelFamily::gaussian, KernelFamily::matern1, KernelFamily::matern2}) {
        for (double gamma : {0.0, 1e-3}) {
            for (int trial = 0; trial < 8; ++trial) {
                const std::size_t b = 2 + static_cast<std::size_t>(rng.below(11));
                const std::size_t m = 1 + static_cast<std::size_t>(rng.below(3));
                const Matrix features = oracle::random_matrix(rng, b, 2);
                const Matrix targets = oracle::random_matrix(rng, b, m);
                const ScalarKernel kernel{family, 0.9};
                const auto fast = rippa_loss(features, targets, kernel, gamma);
                const auto slow = loo_brute_force(features, targets, kernel, gamma);
                CHECK(fast.loss == doctest::Approx(slow.loss).epsilon(1e-8));
                CHECK(max_abs_diff(fast.errors, slow.errors) <
                      1e-8 * (1.0 + max_abs(slow.errors)));
            }
        }
    }
}

TEST_CASE("duplicate rows stay finite under regularization") {
    Matrix features(4, 1);
    features(0, 0) = features(1, 0) = 0.5;
    features(2, 0) = 0.1;
    features(3, 0) = 0.9;
    Matrix targets(4, 1);
    targets(0, 0) = targets(1, 0) = 1.0;
    targets(2, 0) = 0.3;
    targets(3, 0) = -0.2;
    const auto brute = loo_brute_force(features, targets, kGauss1, 1e-3);
    CHECK(std::isfinite(brute.loss));
    const auto fast = rippa_loss(features, targets, kGauss1, 1e-3);
    CHECK(fast.loss == doctest::Approx(brute.loss).epsilon(1e-8));
}

TEST_CASE("loo rejects undersized batches") {
    CHECK_THROWS_AS(rippa_loss(Matrix(1, 1), Matrix(1, 1), kGauss1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(loo_brute_force(Matrix(1, 1), Matrix(1, 1), kGauss1, 0.0),
                    std::invalid_argument);
}

TEST_CASE("adam first step moves by roughly the learning rate") {
    TrainConfig cfg;
    cfg.lr = 0.01;
    Matrix theta(1, 1);
    theta(0, 0) = 2.0;
    Matrix grad(1, 1);
    grad(0, 0) = 0.5;
    AdamMoments moments{Matrix(1, 1), Matrix(1, 1)};
    adam_update(theta, grad, moments, 1, cfg);
    CHECK(std::fabs(theta(0, 0) - (2.0 - cfg.lr)) < 1e-6);
}

TEST_CASE("adam leaves parameters alone for zero gradients") {
    TrainConfig cfg;
    Matrix theta = Matrix::from_rows({{1.0, -2.0}});
    const Matrix before = theta;
    AdamMoments moments{Matrix(1, 2), Matrix(1, 2)};
    adam_update(theta, Matrix(1, 2), moments, 1, cfg);
    CHECK(theta == before);
}

TEST_CASE("adam updates are antisymmetric in the gradient") {
    TrainConfig cfg;
    Matrix theta = Matrix::from_rows({{1.0, 1.0}});
    Matrix grad = Matrix::from_rows({{0.7, -0.7}});
    AdamMoments moments{Matrix(1, 2), Matrix(1, 2)};
    adam_update(theta, grad, moments, 1, cfg);
    CHECK(theta(0, 0) - 1.0 == doctest::Approx(-(theta(0, 1) - 1.0)).epsilon(1e-12));
}

TEST_CASE("batch partition covers every point exactly once") {
    for (std::size_t n : {2ul, 7ul, 10ul, 100ul, 101ul, 199ul}) {
        for (std::size_t batch : {2ul, 4ul, 100ul}) {
            const auto ranges = batch_partition(n, batch);
            std::size_t covered = 0;
            for (std::size_t k = 0; k < ranges.size(); ++k) {
                CHECK(ranges[k].first == covered);
                CHECK(ranges[k].second >= std::min<std::size_t>(n, 2));
                covered += ranges[k].second;
            }
            CHECK(covered == n);
        }
    }
    // 10 points in batches of 4: 4 + 4 + 2, the short tail stays viable.
    const auto ranges = batch_partition(10, 4);
    REQUIRE(ranges.size() == 3);
    CHECK(ranges[2].second == 2);
    // 9 points in batches of 4: the final singleton merges backward.
    const auto merged = batch_partition(9, 4);
    REQUIRE(merged.size() == 2);
    CHECK(merged[1].second == 5);
}

TEST_CASE("short-batch merge keeps training viable") {
    SeededRng rng(52);
    Dataset data;
    data.x = oracle::random_matrix(rng, 9, 1);
    data.y = oracle::random_matrix(rng, 9, 1);
    const auto arch = DeepKernelArchitecture::uniform(2, 1, 2, 3, kGauss1, kGauss1, 1);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.seed = 7;
    const auto result = train_deep_kernel(data, arch, cfg);
    CHECK(result.history.size() == 1);
    CHECK(std::isfinite(result.history[0]));
}

TEST_CASE("zero epochs return the initialization untouched") {
    SeededRng rng(53);
    Dataset data;
    data.x = oracle::random_matrix(rng, 20, 2);
    data.y = oracle::random_matrix(rng, 20, 1);
    const auto arch = DeepKernelArchitecture::uniform(2, 2, 3, 5, kGauss1, kGauss1, 1);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.batch_size = 10;
    cfg.seed = 99;

    const auto result = train_deep_kernel(data, arch, cfg);
    CHECK(result.history.empty());

    SeededRng init_rng(cfg.seed);
    const auto expected = init_params(arch, data.x, init_rng);
    CHECK(result.params.w[0] == expected.w[0]);
    CHECK(result.params.z1 == expected.z1);
}

TEST_CASE("training is deterministic for a fixed seed") {
    SeededRng rng(54);
    Dataset data;
    data.x = oracle::random_matrix(rng, 30, 2);
    data.y = oracle::random_matrix(rng, 30, 1);
    const auto arch = DeepKernelArchitecture::uniform(2, 2, 3, 5, kGauss1, kGauss1, 1);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 10;
    cfg.seed = 21;

    const auto r1 = train_deep_kernel(data, arch, cfg);
    const auto r2 = train_deep_kernel(data, arch, cfg);
    CHECK(r1.history == r2.history);
    CHECK(r1.params.w[0] == r2.params.w[0]);
}

TEST_CASE("training reduces the loss on a smooth target") {
    Dataset data = model_problem_dataset(ModelProblem::f2, 200, 1234);
    const auto arch = DeepKernelArchitecture::uniform(2, 2, 6, 20, kGauss1, kGauss1, 1);
    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.batch_size = 50;
    cfg.gamma_rippa = 1e-3;
    cfg.lr = 0.01;
    cfg.seed = 5;
    const auto result = train_deep_kernel(data, arch, cfg);
    REQUIRE(result.history.size() == 25);
    CHECK(result.history.back() <= result.history.front());
}

TEST_CASE("train rejects shallow architectures and short datasets") {
    Dataset data;
    data.x = Matrix(5, 1);
    data.y = Matrix(5, 1);
    DeepKernelArchitecture shallow;
    shallow.layers = 1;
    shallow.dims = {1};
    TrainConfig cfg;
    cfg.batch_size = 10;
    CHECK_THROWS_AS(train_deep_kernel(data, shallow, cfg), std::invalid_argument);
    const auto arch = DeepKernelArchitecture::uniform(2, 1, 2, 2, kGauss1, kGauss1, 1);
    CHECK_THROWS_AS(train_deep_kernel(data, arch, cfg), TooFewTrainingPoints);
}
