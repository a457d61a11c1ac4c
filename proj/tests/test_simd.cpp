#include <doctest.h>

#include <cmath>
#include <vector>

#include "dkvkoga/rng.hpp"
#include "dkvkoga/simd.hpp"

using dkv::SeededRng;
namespace simd = dkv::simd;

namespace {

std::vector<const simd::Ops*> available_variants() {
    std::vector<const simd::Ops*> variants{&simd::scalar_ops()};
    if (const auto* ops = simd::avx2_ops()) variants.push_back(ops);
    if (const auto* ops = simd::neon_ops()) variants.push_back(ops);
    return variants;
}

const std::vector<std::size_t> kLengths{0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 100, 1000};

} // namespace

TEST_CASE("every vector variant matches the scalar reference") {
    SeededRng rng(20240601);
    const auto& ref = simd::scalar_ops();
    for (const simd::Ops* ops : available_variants()) {
        for (std::size_t n : kLengths) {
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = rng.uniform(-2.0, 2.0);
                b[i] = rng.uniform(-2.0, 2.0);
            }
            const double tol = 1e-13 * (static_cast<double>(n) + 1.0);

            CHECK(ops->dot(a.data(), b.data(), n) ==
                  doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(tol).scale(1.0));
            CHECK(ops->sqdist(a.data(), b.data(), n) ==
                  doctest::Approx(ref.sqdist(a.data(), b.data(), n)).epsilon(tol).scale(1.0));
            CHECK(ops->sum(a.data(), n) ==
                  doctest::Approx(ref.sum(a.data(), n)).epsilon(tol).scale(1.0));
            CHECK(ops->sumsq(a.data(), n) ==
                  doctest::Approx(ref.sumsq(a.data(), n)).epsilon(tol).scale(1.0));

            std::vector<double> y_ops = b, y_ref = b;
            ops->axpy(1.75, a.data(), y_ops.data(), n);
            ref.axpy(1.75, a.data(), y_ref.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(y_ops[i] == doctest::Approx(y_ref[i]));

            std::vector<double> x_ops = a, x_ref = a;
            ops->scal(-0.37, x_ops.data(), n);
            ref.scal(-0.37, x_ref.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(x_ops[i] == x_ref[i]);
        }
    }
}

TEST_CASE("scalar reference computes known values") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{4.0, -5.0, 6.0};
    const auto& ops = simd::scalar_ops();
    CHECK(ops.dot(a.data(), b.data(), 3) == 12.0);
    CHECK(ops.sqdist(a.data(), b.data(), 3) == 9.0 + 49.0 + 9.0);
    CHECK(ops.sum(a.data(), 3) == 6.0);
    CHECK(ops.sumsq(a.data(), 3) == 14.0);
}

TEST_CASE("active table is one of the compiled variants") {
    const auto& active = simd::active();
    bool found = false;
    for (const simd::Ops* ops : available_variants()) {
        if (ops == &active) found = true;
    }
    CHECK(found);
    CHECK(active.name != nullptr);
}
