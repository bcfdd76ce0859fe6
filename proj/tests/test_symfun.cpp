// Elementary symmetric polynomials, layer combinations, and radial ratios.

#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ikern/symfun.hpp"

using namespace ikern;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Subset-sum oracle for p_k, exponential but independent of the DP.
double esp_oracle(const std::vector<double>& r, int k) {
    const int n = static_cast<int>(r.size());
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            if ((mask >> i) & 1u) p *= r[static_cast<std::size_t>(i)];
        sum += p;
    }
    return sum;
}

} // namespace

// ==== binomial coefficients ================================================

TEST_CASE("binom matches Pascal values", "[symfun]") {
    REQUIRE(binom(0, 0) == 1);
    REQUIRE(binom(5, 2) == 10);
    REQUIRE(binom(10, 5) == 252);
    REQUIRE(binom(62, 31) == 465428353255261088LL);
    REQUIRE(binom(7, -1) == 0);
    REQUIRE(binom(7, 8) == 0);
    REQUIRE_THROWS_AS(binom(-1, 0), arity_error);
    REQUIRE_THROWS_AS(binom(63, 1), arity_error);
}

// ==== elementary symmetric polynomials =====================================

TEST_CASE("elem_sym_poly small exact values", "[symfun]") {
    const std::vector<double> r{1.0, 2.0, 3.0};
    REQUIRE(elem_sym_poly(r, 0) == Catch::Approx(1.0));
    REQUIRE(elem_sym_poly(r, 1) == Catch::Approx(6.0));
    REQUIRE(elem_sym_poly(r, 2) == Catch::Approx(11.0));
    REQUIRE(elem_sym_poly(r, 3) == Catch::Approx(6.0));
    REQUIRE_THROWS_AS(elem_sym_poly(r, -1), arity_error);
    REQUIRE_THROWS_AS(elem_sym_poly(r, 4), arity_error);
}

TEST_CASE("elem_sym_poly matches subset oracle on random input", "[symfun]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        std::vector<double> r(static_cast<std::size_t>(n));
        for (auto& v : r) v = 4.0 * u01(rng) - 2.0;
        const auto prefix = elem_sym_poly_prefix(r, n);
        REQUIRE(prefix.size() == static_cast<std::size_t>(n) + 1);
        for (int k = 0; k <= n; ++k) {
            const double want = esp_oracle(r, k);
            REQUIRE(prefix[static_cast<std::size_t>(k)] ==
                    Catch::Approx(want).margin(1e-12 * (1.0 + std::abs(want))));
        }
    }
}

TEST_CASE("elem_sym_poly on all-ones counts subsets", "[symfun]") {
    for (int n = 1; n <= 10; ++n) {
        const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
        for (int k = 0; k <= n; ++k)
            REQUIRE(elem_sym_poly(ones, k) == Catch::Approx(static_cast<double>(binom(n, k))));
    }
}

TEST_CASE("generating identity prod (lambda + r_i)", "[symfun]") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        std::vector<double> r(static_cast<std::size_t>(n));
        for (auto& v : r) v = 3.0 * u01(rng);
        const double lambda = 0.2 + 2.0 * u01(rng);
        double prod = 1.0;
        for (const double v : r) prod *= lambda + v;
        double sum = 0.0;
        const auto p = elem_sym_poly_prefix(r, n);
        for (int k = 0; k <= n; ++k) sum += std::pow(lambda, n - k) * p[static_cast<std::size_t>(k)];
        REQUIRE(sum == Catch::Approx(prod).epsilon(1e-12));
    }
}

// ==== layer combinations ===================================================

TEST_CASE("h_poly vanishes at the all-ones point", "[symfun]") {
    for (int n = 1; n <= 8; ++n) {
        const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
        for (int k = 1; k <= n; ++k)
            REQUIRE(std::abs(h_poly(ones, k)) < 1e-12);
    }
}

TEST_CASE("h_poly worked value", "[symfun]") {
    // H_2^3(a) = p_3(a) + 2 - p_1(a); at a = (1/2, 1/2, 1/2): 1/8 + 2 - 3/2.
    REQUIRE(h_poly({0.5, 0.5, 0.5}, 2) == Catch::Approx(0.625));
}

TEST_CASE("top layer is a signed reflection", "[symfun]") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        std::vector<double> r(static_cast<std::size_t>(n)), refl(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            r[static_cast<std::size_t>(i)] = u01(rng);
            refl[static_cast<std::size_t>(i)] = 1.0 - r[static_cast<std::size_t>(i)];
        }
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        REQUIRE(sign * h_poly(r, n) ==
                Catch::Approx(elem_sym_poly(refl, n)).margin(1e-13));
    }
}

TEST_CASE("h_poly rejects out-of-range order", "[symfun]") {
    REQUIRE_THROWS_AS(h_poly({0.5, 0.5}, 0), arity_error);
    REQUIRE_THROWS_AS(h_poly({0.5, 0.5}, 3), arity_error);
}

// ==== exponential layer kernel core ========================================

TEST_CASE("e_kernel_core vanishes below the interaction order", "[symfun]") {
    // Fewer than k strictly positive arguments kill every layer exactly.
    REQUIRE(std::abs(e_kernel_core({1.3, 0.0, 0.0}, 2)) < 1e-14);
    REQUIRE(std::abs(e_kernel_core({0.0, 2.0, 0.0, 0.0}, 2)) < 1e-14);
    REQUIRE(std::abs(e_kernel_core({0.7, 0.0}, 1)) > 1e-3); // one positive is enough at k = 1
}

TEST_CASE("e_kernel_core sign and sandwich", "[symfun]") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        const int k = 1 + static_cast<int>(rng() % n);
        std::vector<double> s(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n)),
            ca(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            s[static_cast<std::size_t>(i)] = 3.0 * u01(rng);
            a[static_cast<std::size_t>(i)] = std::exp(-s[static_cast<std::size_t>(i)]);
            ca[static_cast<std::size_t>(i)] = 1.0 - a[static_cast<std::size_t>(i)];
        }
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double e = sign * e_kernel_core(s, k);
        const double pk = elem_sym_poly(ca, k);
        REQUIRE(e >= -1e-12);
        REQUIRE(pk / static_cast<double>(binom(n, k)) <= e + 1e-12);
        REQUIRE(e <= pk + 1e-12);
    }
}

TEST_CASE("e_kernel_core at k = n is a product of differences", "[symfun]") {
    const std::vector<double> s{0.3, 1.1, 0.6};
    double prod = 1.0;
    for (const double v : s) prod *= std::exp(-v) - 1.0;
    REQUIRE(e_kernel_core(s, 3) == Catch::Approx(prod).margin(1e-14));
}

TEST_CASE("e_kernel_core rejects negative arguments", "[symfun]") {
    REQUIRE_THROWS_AS(e_kernel_core({0.5, -0.1}, 1), domain_error);
}

// ==== shifted ratio ========================================================

TEST_CASE("shifted_ratio worked values", "[symfun]") {
    REQUIRE(shifted_ratio({1.0, 1.0, 1.0, 1.0}, 2) == Catch::Approx(4.0));
    REQUIRE(shifted_ratio({2.0, 2.0, 2.0, 2.0}, 1) == Catch::Approx(1.5));
}

TEST_CASE("shifted_ratio domain", "[symfun]") {
    REQUIRE_THROWS_AS(shifted_ratio({1.0, -0.5}, 1), domain_error);
    // Needs at least k + 1 strictly positive entries.
    REQUIRE_THROWS_AS(shifted_ratio({1.0, 0.0, 0.0}, 1), degenerate_support_error);
    REQUIRE_NOTHROW(shifted_ratio({1.0, 1.0, 0.0}, 1));
}
