// Signed energies, the interaction statistic's two evaluation paths, and the
// permutation test.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ikern/interactions.hpp"
#include "ikern/statistics.hpp"

using namespace ikern;

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

SpaceShape shape_of(std::vector<int> dims) {
    SpaceShape s;
    s.dims = std::move(dims);
    return s;
}

KernelSpec product_exp(int n, double rate) {
    ProductBernstein p;
    p.parts.assign(static_cast<std::size_t>(n), Bernstein1D::exponential(rate));
    return p;
}

KernelSpec orderk_two_atoms(int n, int k) {
    OrderKKernel o;
    o.n = n;
    o.k = k;
    o.eta = {EtaAtom{std::vector<double>(static_cast<std::size_t>(n), 1.0), 1.0},
             EtaAtom{std::vector<double>(static_cast<std::size_t>(n), 0.5), 0.5}};
    o.cross = {CrossTerm{{0, 1}, {Bernstein1D::exponential(1.0), Bernstein1D::exponential(0.7)}}};
    return o;
}

// Rows over a small per-variable alphabet, discrete enough to materialize.
std::vector<ProductPoint> random_rows(std::mt19937_64& rng, int m, int n, int alphabet) {
    std::vector<ProductPoint> rows;
    for (int a = 0; a < m; ++a) {
        ProductPoint pt;
        for (int i = 0; i < n; ++i)
            pt.push_back({static_cast<double>(rng() % static_cast<unsigned>(alphabet)) + 0.3 * i});
        rows.push_back(std::move(pt));
    }
    return rows;
}

} // namespace

// ==== quadratic energy =====================================================

TEST_CASE("worked energy of the two-point Moebius difference", "[statistics]") {
    const SpaceShape s = shape_of({1, 1});
    const auto mu = mu_kn({{0.0}, {0.0}}, {{1.0}, {1.0}}, 2, s);
    const double q = 1.0 - std::exp(-1.0);
    REQUIRE(quadratic_energy(product_exp(2, 1.0), mu, 2) == Catch::Approx(4.0 * q * q).epsilon(1e-12));
}

TEST_CASE("quadratic_energy validates order and shape", "[statistics]") {
    const SpaceShape s = shape_of({1, 1});
    const auto mu = mu_kn({{0.0}, {0.0}}, {{1.0}, {1.0}}, 2, s);
    REQUIRE_THROWS_AS(quadratic_energy(product_exp(2, 1.0), mu, 1), arity_error);
    REQUIRE_THROWS_AS(quadratic_energy(product_exp(3, 1.0), mu, 3), shape_error);
}

TEST_CASE("energy of a product measure under a product kernel factorizes", "[statistics]") {
    // (delta_0 - delta_1)^{x2} against exp factors: energy = (2 q)^2 with
    // q = 1 - e^{-1}, since each factor contributes -2q and the sign flips.
    const auto z = from_atoms(shape_of({1}), {{{{0.0}}, 1.0}, {{{1.0}}, -1.0}});
    const auto mu = product({z, z});
    const double q = 1.0 - std::exp(-1.0);
    REQUIRE(quadratic_energy(product_exp(2, 1.0), mu, 2) == Catch::Approx(4.0 * q * q).epsilon(1e-12));
}

// ==== statistic paths ======================================================

TEST_CASE("materialized and factored paths agree", "[statistics]") {
    std::mt19937_64 rng(31);
    for (const bool orderk : {false, true}) {
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 3, m = 12;
            const int k = orderk ? 2 : n; // product kernels carry order n
            const auto rows = random_rows(rng, m, n, 3);
            const SpaceShape s = shape_of({1, 1, 1});
            const KernelSpec spec = orderk ? orderk_two_atoms(n, k) : product_exp(n, 1.3);

            const double direct =
                detail::signed_pair_energy(spec, lancaster(detail::empirical_measure(rows, s), k), k);
            const auto engine = detail::build_cross_term_engine(rows, s, k, spec);
            REQUIRE(engine.has_value());
            const double factored = engine->eval(detail::identity_maps(n, m));
            REQUIRE(factored == Catch::Approx(direct).margin(1e-10 * (1.0 + std::abs(direct))));

            const double stat = interaction_statistic(rows, s, k, spec, StatMode::lancaster);
            REQUIRE(stat == Catch::Approx(direct).margin(1e-10 * (1.0 + std::abs(direct))));
        }
    }
}

TEST_CASE("streitberg mode matches lancaster at two variables", "[statistics]") {
    std::mt19937_64 rng(32);
    const auto rows = random_rows(rng, 14, 2, 3);
    const SpaceShape s = shape_of({1, 1});
    const auto spec = product_exp(2, 1.0);
    const double a = interaction_statistic(rows, s, 2, spec, StatMode::lancaster);
    const double b = interaction_statistic(rows, s, 2, spec, StatMode::streitberg);
    REQUIRE(a == Catch::Approx(b).margin(1e-12 * (1.0 + std::abs(a))));
}

TEST_CASE("interaction_statistic validates its contract", "[statistics]") {
    const SpaceShape s = shape_of({1, 1});
    const auto rows = std::vector<ProductPoint>{{{0.0}, {0.0}}, {{1.0}, {1.0}}};
    REQUIRE_THROWS_AS(interaction_statistic({}, s, 2, product_exp(2, 1.0), StatMode::lancaster),
                      arity_error);
    REQUIRE_THROWS_AS(interaction_statistic(rows, s, 1, product_exp(2, 1.0), StatMode::lancaster),
                      arity_error); // statistic order must match the kernel's
    REQUIRE_THROWS_AS(interaction_statistic(rows, s, 2, product_exp(3, 1.0), StatMode::lancaster),
                      shape_error);
    // streitberg needs k = n.
    const auto rows3 = std::vector<ProductPoint>{{{0.0}, {0.0}, {0.0}}, {{1.0}, {1.0}, {0.0}}};
    REQUIRE_THROWS_AS(interaction_statistic(rows3, shape_of({1, 1, 1}), 2, orderk_two_atoms(3, 2),
                                            StatMode::streitberg),
                      arity_error);
}

TEST_CASE("oversized materializations are refused, not attempted", "[statistics]") {
    // 40 distinct values per variable: the value grid holds 64000 > 50000
    // candidate atoms, past the materialization limit for modes that cannot
    // fall back to the factored engine.
    std::mt19937_64 rng(34);
    std::vector<ProductPoint> rows;
    for (int a = 0; a < 40; ++a) rows.push_back({{u01(rng)}, {u01(rng)}, {u01(rng)}});
    const SpaceShape s = shape_of({1, 1, 1});
    REQUIRE_THROWS_AS(interaction_statistic(rows, s, 3, product_exp(3, 1.0), StatMode::streitberg),
                      input_error);
    SumCMKernel cm;
    cm.n = 3;
    cm.ell = 2;
    cm.psi = CMFamily::power_cm(2, 1.5);
    REQUIRE_THROWS_AS(interaction_statistic(rows, s, 2, KernelSpec{cm}, StatMode::lancaster),
                      input_error);
    // The same sample size is fine when the kernel admits the factored path.
    REQUIRE(std::isfinite(
        interaction_statistic(rows, s, 2, orderk_two_atoms(3, 2), StatMode::lancaster)));
}

// ==== permutation test =====================================================

TEST_CASE("permutation p-values are deterministic in the seed", "[statistics]") {
    std::mt19937_64 rng(33);
    std::vector<ProductPoint> rows;
    for (int a = 0; a < 20; ++a) {
        const double x = u01(rng), y = u01(rng);
        rows.push_back({{x}, {y}});
    }
    const SpaceShape s = shape_of({1, 1});
    const auto spec = product_exp(2, 1.0);
    const auto r1 = permutation_pvalue(rows, s, 2, spec, StatMode::lancaster, 99, 42);
    const auto r2 = permutation_pvalue(rows, s, 2, spec, StatMode::lancaster, 99, 42);
    REQUIRE(r1.statistic == r2.statistic);
    REQUIRE(r1.p_value == r2.p_value);
    REQUIRE(r1.p_value >= 1.0 / 100.0);
    REQUIRE(r1.p_value <= 1.0);
    const auto r3 = permutation_pvalue(rows, s, 2, spec, StatMode::lancaster, 99, 43);
    REQUIRE(r3.statistic == r1.statistic); // the observed value ignores the seed
}

TEST_CASE("coupled columns are detected", "[statistics]") {
    std::vector<ProductPoint> rows;
    for (int a = 0; a < 30; ++a) {
        const double v = 0.2 * a;
        rows.push_back({{v}, {v}});
    }
    const SpaceShape s = shape_of({1, 1});
    const auto res = permutation_pvalue(rows, s, 2, product_exp(2, 1.0), StatMode::lancaster, 99, 7);
    REQUIRE(res.statistic > 1e-4);
    REQUIRE(res.p_value <= 0.05);
}

TEST_CASE("permutation fallback path without a factored engine", "[statistics]") {
    SumCMKernel cm;
    cm.n = 2;
    cm.ell = 2;
    cm.psi = CMFamily::power_cm(2, 1.5);
    std::mt19937_64 rng(34);
    const auto rows = random_rows(rng, 10, 2, 3);
    const SpaceShape s = shape_of({1, 1});
    const auto r1 = permutation_pvalue(rows, s, 2, KernelSpec{cm}, StatMode::lancaster, 19, 9);
    const auto r2 = permutation_pvalue(rows, s, 2, KernelSpec{cm}, StatMode::lancaster, 19, 9);
    REQUIRE(r1.p_value == r2.p_value);
    REQUIRE(r1.p_value >= 0.05); // 1/(B+1) floor
}

TEST_CASE("permutation input validation", "[statistics]") {
    const SpaceShape s = shape_of({1, 1});
    const std::vector<ProductPoint> one{{{0.0}, {0.0}}};
    const std::vector<ProductPoint> two{{{0.0}, {0.0}}, {{1.0}, {1.0}}};
    REQUIRE_THROWS_AS(permutation_pvalue(two, s, 2, product_exp(2, 1.0), StatMode::lancaster, 0, 1),
                      arity_error);
    REQUIRE_THROWS_AS(permutation_pvalue(one, s, 2, product_exp(2, 1.0), StatMode::lancaster, 9, 1),
                      arity_error);
}
