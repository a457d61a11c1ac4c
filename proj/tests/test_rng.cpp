#include <doctest.h>

#include <cmath>
#include <set>

#include "dkvkoga/errors.hpp"
#include "dkvkoga/rng.hpp"

using namespace dkv;

TEST_CASE("identical seeds produce identical streams") {
    SeededRng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    SeededRng c(1234), d(1234);
    for (int i = 0; i < 100; ++i) CHECK(c.uniform01() == d.uniform01());
}

TEST_CASE("different seeds diverge") {
    SeededRng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
    CHECK(equal == 0);
}

TEST_CASE("uniform01 stays in [0,1)") {
    SeededRng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("derive yields independent deterministic substreams") {
    SeededRng base(99);
    SeededRng s1 = base.derive(1);
    SeededRng s2 = base.derive(2);
    SeededRng s1_again = base.derive(1);
    CHECK(s1.next_u64() == s1_again.next_u64());
    SeededRng t1 = base.derive(1), t2 = base.derive(2);
    CHECK(t1.next_u64() != t2.next_u64());
}

TEST_CASE("shuffle is deterministic and a permutation") {
    std::vector<std::size_t> items(50);
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
    SeededRng a(5), b(5);
    auto x = items, y = items;
    a.shuffle(x);
    b.shuffle(y);
    CHECK(x == y);
    std::set<std::size_t> seen(x.begin(), x.end());
    CHECK(seen.size() == items.size());
}

TEST_CASE("sample_without_replacement returns distinct indices") {
    SeededRng rng(11);
    const auto picks = rng.sample_without_replacement(20, 20);
    std::set<std::size_t> seen(picks.begin(), picks.end());
    CHECK(seen.size() == 20);
    CHECK_THROWS_AS(rng.sample_without_replacement(3, 4), std::invalid_argument);
}

TEST_CASE("sample_uniform respects the box and the seed") {
    const std::vector<double> low{0.0, 0.0}, high{1.0, 1.0};

    SeededRng rng_a(42), rng_b(42);
    const Matrix a = sample_uniform(rng_a, low, high, 10000);
    const Matrix b = sample_uniform(rng_b, low, high, 10000);
    CHECK(a == b);

    double mean0 = 0.0, mean1 = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        CHECK(a(i, 0) >= 0.0);
        CHECK(a(i, 0) < 1.0);
        CHECK(a(i, 1) >= 0.0);
        CHECK(a(i, 1) < 1.0);
        mean0 += a(i, 0);
        mean1 += a(i, 1);
    }
    mean0 /= static_cast<double>(a.rows());
    mean1 /= static_cast<double>(a.rows());
    CHECK(std::fabs(mean0 - 0.5) < 0.02);
    CHECK(std::fabs(mean1 - 0.5) < 0.02);
}

TEST_CASE("sample_uniform edge cases") {
    SeededRng rng(1);
    const std::vector<double> low{0.0}, high{1.0};
    const Matrix empty = sample_uniform(rng, low, high, 0);
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 1);

    const std::vector<double> bad_high{0.0};
    CHECK_THROWS_AS(sample_uniform(rng, low, bad_high, 3), InvalidBox);
}
