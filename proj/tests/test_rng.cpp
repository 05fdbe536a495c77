#include <doctest.h>

#include <cmath>
#include <set>

#include "netar/rng.hpp"

using namespace netar;

TEST_CASE("same seed reproduces the identical stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive_seed distinguishes paths and orderings") {
    const std::uint64_t master = 7;
    std::set<std::uint64_t> seen;
    seen.insert(derive_seed(master, {0}));
    seen.insert(derive_seed(master, {1}));
    seen.insert(derive_seed(master, {0, 0}));
    seen.insert(derive_seed(master, {0, 1}));
    seen.insert(derive_seed(master, {1, 0}));
    seen.insert(derive_seed(master, {1, 0, 0}));
    CHECK(seen.size() == 6);
    // deterministic
    CHECK(derive_seed(master, {3, 1, 4}) == derive_seed(master, {3, 1, 4}));
    // different masters diverge
    CHECK(derive_seed(1, {0}) != derive_seed(2, {0}));
}

TEST_CASE("uniform stays inside [0, 1) with the right mean") {
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // mean 1/2, sd of the mean = 1/sqrt(12 n)
    CHECK(std::abs(sum / n - 0.5) < 3.0 / std::sqrt(12.0 * n));
}

TEST_CASE("normal moments match the standard normal") {
    Rng rng(99);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    // var of the sample variance of a normal is ~2/n
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("bernoulli frequency concentrates at p") {
    Rng rng(5);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
    const double se = std::sqrt(0.3 * 0.7 / n);
    CHECK(std::abs(hits / static_cast<double>(n) - 0.3) < 3.0 * se);
}

TEST_CASE("uniform_int covers exactly [0, n)") {
    Rng rng(11);
    std::set<int> seen;
    for (int i = 0; i < 1000; ++i) {
        const int v = rng.uniform_int(7);
        REQUIRE(v >= 0);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}
