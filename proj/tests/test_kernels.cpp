#include <doctest.h>

#include <array>
#include <cmath>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/kernels.hpp"
#include "dkvkoga/linalg.hpp"
#include "oracles.hpp"

using namespace dkv;

namespace {

const std::array<KernelFamily, 3> kFamilies{KernelFamily::gaussian, KernelFamily::matern1,
                                            KernelFamily::matern2};

} // namespace

TEST_CASE("kernel value is one at zero distance") {
    const std::vector<double> x{0.3, -0.7, 2.0};
    for (KernelFamily family : kFamilies) {
        const ScalarKernel k{family, 1.7};
        CHECK(eval_kernel(k, x, x) == 1.0);
    }
}

TEST_CASE("closed forms at unit distance, epsilon one") {
    const std::vector<double> zero{0.0}, one{1.0};
    const double inv_e = std::exp(-1.0);
    CHECK(eval_kernel({KernelFamily::gaussian, 1.0}, zero, one) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(eval_kernel({KernelFamily::matern1, 1.0}, zero, one) ==
          doctest::Approx(2.0 * inv_e).epsilon(1e-15));
    CHECK(eval_kernel({KernelFamily::matern1, 1.0}, zero, one) ==
          doctest::Approx(0.7357588823428847).epsilon(1e-15));
    // (1 + 1 + 1/3) / e
    CHECK(eval_kernel({KernelFamily::matern2, 1.0}, zero, one) ==
          doctest::Approx(0.8583853627333653).epsilon(1e-14));
}

TEST_CASE("symmetry is exact and translation invariance holds") {
    SeededRng rng(41);
    for (KernelFamily family : kFamilies) {
        const ScalarKernel k{family, 0.8};
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> x(3), y(3), z(3);
            for (int c = 0; c < 3; ++c) {
                x[c] = rng.uniform(-2.0, 2.0);
                y[c] = rng.uniform(-2.0, 2.0);
                z[c] = rng.uniform(-2.0, 2.0);
            }
            CHECK(eval_kernel(k, x, y) == eval_kernel(k, y, x));

            std::vector<double> xs(3), ys(3);
            for (int c = 0; c < 3; ++c) {
                xs[c] = x[c] + z[c];
                ys[c] = y[c] + z[c];
            }
            CHECK(eval_kernel(k, xs, ys) == doctest::Approx(eval_kernel(k, x, y)).epsilon(1e-14));
        }
    }
}

TEST_CASE("kernel values stay in (0, 1], one only at zero distance") {
    SeededRng rng(42);
    for (KernelFamily family : kFamilies) {
        const ScalarKernel k{family, 1.3};
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(2), y(2);
            for (int c = 0; c < 2; ++c) {
                x[c] = rng.uniform(-3.0, 3.0);
                y[c] = rng.uniform(-3.0, 3.0);
            }
            const double v = eval_kernel(k, x, y);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            if (x != y) CHECK(v < 1.0);
        }
    }
}

TEST_CASE("gram matrices match eval and are exactly symmetric") {
    const ScalarKernel k{KernelFamily::gaussian, 1.0};
    const Matrix single = Matrix::from_rows({{0.25, 0.5}});
    CHECK(gram(k, single) == Matrix::from_rows({{1.0}}));

    const Matrix x = Matrix::from_rows({{0.0}, {1.0}});
    const Matrix g = gram(k, x);
    const double inv_e = std::exp(-1.0);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(inv_e).epsilon(1e-15));
    CHECK(g(0, 1) == g(1, 0));

    SeededRng rng(17);
    const Matrix pts = oracle::random_matrix(rng, 7, 3);
    const Matrix gs = gram(k, pts);
    for (std::size_t i = 0; i < 7; ++i) {
        for (std::size_t j = 0; j < 7; ++j) CHECK(gs(i, j) == gs(j, i));
    }
    CHECK(max_abs_diff(gs, gram(k, pts, pts)) < 1e-14);

    CHECK_THROWS_AS(gram(k, Matrix(2, 2), Matrix(2, 3)), DimensionMismatch);
}

TEST_CASE("gram matrices of distinct points are positive definite") {
    SeededRng rng(4242);
    for (KernelFamily family : kFamilies) {
        const ScalarKernel k{family, 1.1};
        for (std::size_t n : {2ul, 5ul, 8ul}) {
            const Matrix pts = oracle::random_matrix(rng, n, 2);
            const auto eig = jacobi_eigh(gram(k, pts));
            CHECK(eig.values.back() > 0.0);
            CHECK(eig.values.back() >= -1e-10);
        }
    }
}

TEST_CASE("identity extension: multi-RHS solve equals per-column solves") {
    SeededRng rng(31337);
    const ScalarKernel k{KernelFamily::matern2, 0.9};
    const Matrix pts = oracle::random_matrix(rng, 6, 2);
    Matrix g = gram(k, pts);
    add_scaled_identity(g, 1e-8);
    const auto factor = cholesky(g);

    const Matrix y = oracle::random_matrix(rng, 6, 4);
    const Matrix block = factor.solve(y);
    for (std::size_t c = 0; c < y.cols(); ++c) {
        Matrix col(y.rows(), 1);
        for (std::size_t i = 0; i < y.rows(); ++i) col(i, 0) = y(i, c);
        const Matrix single = factor.solve(col);
        for (std::size_t i = 0; i < y.rows(); ++i) CHECK(single(i, 0) == block(i, c));
    }
}

TEST_CASE("kernel slope matches a difference quotient") {
    for (KernelFamily family : kFamilies) {
        const ScalarKernel k{family, 1.4};
        for (double r : {0.2, 0.9, 2.5}) {
            const double h = 1e-6;
            const double dk = (kernel_from_dist(k, r + h) - kernel_from_dist(k, r - h)) / (2.0 * h);
            CHECK(kernel_slope_over_r(k, r) * r == doctest::Approx(dk).epsilon(1e-6));
        }
        // Removable singularity at r = 0 stays finite.
        CHECK(std::isfinite(kernel_slope_over_r(k, 0.0)));
    }
}
