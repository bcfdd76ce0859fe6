#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/interactions.hpp"
#include "ikern/kernels.hpp"
#include "ikern/measure.hpp"
#include "ikern/statistics.hpp"
#include "ikern/symfun.hpp"

namespace ikern {

/// Outcome of one numerical check: passed iff worst_violation <= tolerance.
/// Violations are normalized by the natural scale of the quantity checked,
/// so tolerances are relative.
struct VerifyReport {
    std::string name;
    int trials = 0;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::uint64_t seed = 0;
};

namespace detail {

[[nodiscard]] inline VerifyReport make_report(std::string name, int trials, double worst, double tol,
                                              std::uint64_t seed) {
    return {std::move(name), trials, worst, tol, worst <= tol, seed};
}

[[nodiscard]] inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

[[nodiscard]] inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * u01(rng);
}

[[nodiscard]] inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t cut =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r = rng();
    while (r >= cut) r = rng();
    return r % n;
}

/// Largest normalized negative eigenvalue of a symmetric matrix (0 if PSD).
[[nodiscard]] inline double psd_violation(const Eigen::MatrixXd& K) {
    const double scale = std::max(K.cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    return std::max(0.0, -es.eigenvalues().minCoeff()) / scale;
}

} // namespace detail

/// Checks a symmetric kernel matrix for positive semidefiniteness.
[[nodiscard]] inline VerifyReport gram_psd_check(const Eigen::MatrixXd& K, double tol = 1e-9) {
    if (K.rows() != K.cols()) throw input_error("gram_psd_check: matrix must be square");
    if (K.rows() == 0) throw input_error("gram_psd_check: matrix must be nonempty");
    const double scale = std::max(K.cwiseAbs().maxCoeff(), 1.0);
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw input_error("gram_psd_check: matrix is not symmetric");
    return detail::make_report("gram_psd", 1, detail::psd_violation(K), tol, 0);
}

/// Checks that gamma is conditionally negative definite as a radial function
/// on the line: for random point sets, e^{-r gamma(d)} Gram matrices must be
/// PSD for several r > 0, and the centered kernel
///   gamma(d(x,w)) + gamma(d(y,w)) - gamma(d(x,y)) - gamma(0)
/// must be PSD.
[[nodiscard]] inline VerifyReport cnd_check(const std::function<double(double)>& gamma, int trials,
                                            std::uint64_t seed, double tol = 1e-9) {
    if (trials < 1) throw arity_error("cnd_check: need at least one trial");
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const int p = 2 + static_cast<int>(detail::bounded(rng, 7));
        std::vector<double> x(static_cast<std::size_t>(p));
        for (auto& v : x) v = detail::uniform(rng, -5.0, 5.0);
        Eigen::MatrixXd G(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) G(i, j) = gamma(std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]));
        for (const double r : {0.1, 1.0, 10.0})
            worst = std::max(worst, detail::psd_violation((-r * G.array()).exp().matrix()));
        const double g0 = gamma(0.0);
        Eigen::MatrixXd C(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) C(i, j) = G(i, 0) + G(0, j) - G(i, j) - g0;
        worst = std::max(worst, detail::psd_violation(C));
    }
    return detail::make_report("cnd", trials, worst, tol, seed);
}

/// Finite-difference check that (-1)^q psi^(q)(t) >= 0 for
/// q = ell .. ell + max_order on a positive grid, i.e. that (-1)^ell
/// psi^(ell) is completely monotone as far as central differences can see.
/// Violations are normalized per order by the largest difference magnitude
/// on the grid; the default tolerance absorbs discretization error.
[[nodiscard]] inline VerifyReport complete_monotone_check(const std::function<double(double)>& psi,
                                                          int ell, std::vector<double> grid = {},
                                                          int max_order = 4, double tol = 1e-6) {
    if (ell < 0) throw arity_error("complete_monotone_check: ell must be >= 0");
    if (max_order < 0 || max_order > 8)
        throw arity_error("complete_monotone_check: max_order must be in [0, 8]");
    if (grid.empty()) grid = {0.5, 1.0, 2.0, 4.0, 8.0};
    for (const double t : grid)
        if (!(t > 0.0)) throw domain_error("complete_monotone_check: grid must be strictly positive");

    double worst = 0.0;
    for (int q = ell; q <= ell + max_order; ++q) {
        double bad = 0.0;
        long double denom = 0.0L;
        for (const double t : grid) {
            const long double h = 0.01L * t;
            long double diff = 0.0L;
            for (int i = 0; i <= q; ++i) {
                const long double node =
                    static_cast<long double>(t) + (static_cast<long double>(q) / 2.0L - i) * h;
                const long double term = static_cast<long double>(binom(q, i)) *
                                         static_cast<long double>(psi(static_cast<double>(node)));
                diff += (i % 2 == 0) ? term : -term;
            }
            long double scaled = diff;
            for (int i = 0; i < q; ++i) scaled /= h;
            const long double signedv = (q % 2 == 0) ? scaled : -scaled;
            denom = std::max(denom, std::abs(scaled));
            bad = std::max(bad, static_cast<double>(-std::min(signedv, 0.0L)));
        }
        worst = std::max(worst, bad / static_cast<double>(std::max(denom, 1e-300L)));
    }
    return detail::make_report("complete_monotone", static_cast<int>(grid.size()), worst, tol, 0);
}

/// Frechet alternating-sum identity:
///   sum_{F subset {1..ell}} (-1)^{ell-|F|} (sum_{i in F} t_i)^k
/// equals 0 for k < ell and ell! prod t_i for k = ell.
[[nodiscard]] inline VerifyReport frechet_check(int ell, const std::vector<double>& t, int k,
                                                double tol = 1e-10) {
    if (ell < 1 || ell > 20) throw arity_error("frechet_check: ell must be in [1, 20]");
    if (k < 0 || k > ell) throw arity_error("frechet_check: k must be in [0, ell]");
    if (static_cast<int>(t.size()) != ell)
        throw shape_error("frechet_check: t must have ell entries");

    long double sum = 0.0L, scale = 0.0L;
    for (std::uint32_t mask = 0; mask < (1u << ell); ++mask) {
        long double s = 0.0L;
        for (int i = 0; i < ell; ++i)
            if ((mask >> i) & 1u) s += static_cast<long double>(t[static_cast<std::size_t>(i)]);
        const long double p = std::pow(s, static_cast<long double>(k));
        scale += std::abs(p);
        sum += ((ell - std::popcount(mask)) % 2 == 0) ? p : -p;
    }
    long double expected = 0.0L;
    if (k == ell) {
        expected = 1.0L;
        for (int i = 1; i <= ell; ++i) expected *= i;
        for (const double v : t) expected *= static_cast<long double>(v);
    }
    const double worst = static_cast<double>(std::abs(sum - expected) / (scale + 1.0L));
    return detail::make_report("frechet", 1, worst, tol, 0);
}

namespace detail {

[[nodiscard]] inline Block random_block(std::mt19937_64& rng, int d) {
    Block b(static_cast<std::size_t>(d));
    for (auto& c : b) c = uniform(rng, -3.0, 3.0);
    return b;
}

/// Random member of M_k on n variables with the given block dimensions:
/// cycles between mean-zero product measures, Lancaster remainders of random
/// probabilities, and discrete Moebius differences.
[[nodiscard]] inline DiscreteMeasure random_mk_measure(std::mt19937_64& rng, int n, int k, int which,
                                                       int fixed_dim = 0) {
    SpaceShape shape;
    shape.dims.resize(static_cast<std::size_t>(n));
    for (auto& d : shape.dims) d = fixed_dim > 0 ? fixed_dim : 1 + static_cast<int>(bounded(rng, 3));

    if (which % 3 == 0) {
        // Product with exactly k mean-zero factors.
        std::vector<int> zero_at(static_cast<std::size_t>(n), 0);
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)], order[bounded(rng, static_cast<std::uint64_t>(i) + 1)]);
        for (int j = 0; j < k; ++j) zero_at[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = 1;
        std::vector<DiscreteMeasure> factors;
        for (int i = 0; i < n; ++i) {
            const int d = shape.dims[static_cast<std::size_t>(i)];
            const int atoms = 2 + static_cast<int>(bounded(rng, 2));
            std::vector<std::pair<ProductPoint, double>> fa;
            std::vector<double> w(static_cast<std::size_t>(atoms));
            for (auto& v : w) v = uniform(rng, -1.0, 1.0);
            if (zero_at[static_cast<std::size_t>(i)] != 0) {
                double mean = 0.0;
                for (const double v : w) mean += v / atoms;
                for (auto& v : w) v -= mean;
            } else {
                double mass = 0.0;
                for (auto& v : w) {
                    v = std::abs(v) + 0.05;
                    mass += v;
                }
                for (auto& v : w) v /= mass;
            }
            SpaceShape fshape;
            fshape.dims = {d};
            for (int a = 0; a < atoms; ++a)
                fa.emplace_back(ProductPoint{random_block(rng, d)}, w[static_cast<std::size_t>(a)]);
            factors.push_back(from_atoms(fshape, fa));
        }
        // Route the single-variable factors into the n-variable shape.
        DiscreteMeasure out = product(factors);
        out.shape = shape;
        return out;
    }

    if (which % 3 == 1) {
        // Lancaster remainder of a random P against a random joint Q.
        std::vector<std::vector<Block>> grid(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int vals = 2 + static_cast<int>(bounded(rng, 2));
            for (int v = 0; v < vals; ++v)
                grid[static_cast<std::size_t>(i)].push_back(random_block(rng, shape.dims[static_cast<std::size_t>(i)]));
        }
        const auto random_prob = [&](int atoms) {
            std::vector<std::pair<ProductPoint, double>> pa;
            double mass = 0.0;
            for (int a = 0; a < atoms; ++a) {
                ProductPoint pt(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i)
                    pt[static_cast<std::size_t>(i)] = grid[static_cast<std::size_t>(i)][bounded(
                        rng, grid[static_cast<std::size_t>(i)].size())];
                const double w = u01(rng) + 0.05;
                mass += w;
                pa.emplace_back(std::move(pt), w);
            }
            for (auto& [pt, w] : pa) w /= mass;
            return from_atoms(shape, pa);
        };
        return lancaster_general(random_prob(4 + static_cast<int>(bounded(rng, 4))),
                                 random_prob(4 + static_cast<int>(bounded(rng, 4))), k);
    }

    // Discrete Moebius difference between two separated points.
    ProductPoint x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = random_block(rng, shape.dims[static_cast<std::size_t>(i)]);
        y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
        for (auto& c : y[static_cast<std::size_t>(i)]) c += uniform(rng, 0.5, 1.5);
    }
    return mu_kn(x, y, k, shape);
}

[[nodiscard]] inline double energy_of(const std::function<double(const std::vector<double>&)>& g,
                                      const DiscreteMeasure& mu, int k) {
    const int n = mu.shape.vars();
    long double acc = 0.0L;
    std::vector<double> d(static_cast<std::size_t>(n));
    for (std::size_t u = 0; u < mu.atoms.size(); ++u)
        for (std::size_t v = u; v < mu.atoms.size(); ++v) {
            for (int i = 0; i < n; ++i)
                d[static_cast<std::size_t>(i)] = block_distance(mu.atoms[u].first[static_cast<std::size_t>(i)],
                                                                mu.atoms[v].first[static_cast<std::size_t>(i)]);
            acc += static_cast<long double>((u == v ? 1.0 : 2.0) * mu.atoms[u].second * mu.atoms[v].second *
                                            g(d));
        }
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * static_cast<double>(acc);
}

} // namespace detail

/// Monte-Carlo check that a kernel is positive definite of interaction order
/// k: for random members mu of M_k, the signed energy (-1)^k B(mu, mu) must
/// be nonnegative.  Violations are normalized by the squared total mass.
[[nodiscard]] inline VerifyReport pdi_random_check(const KernelSpec& spec, int k, int trials,
                                                   std::uint64_t seed, double tol = 1e-9,
                                                   int dim = 0) {
    validate_kernel(spec);
    if (trials < 1) throw arity_error("pdi_random_check: need at least one trial");
    if (dim < 0 || dim > 8) throw arity_error("pdi_random_check: dim must be in [0, 8]");
    const int n = kernel_vars(spec);
    if (k < 1 || k > n) throw arity_error("pdi_random_check: k must be in [1, n]");
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const DiscreteMeasure mu = detail::random_mk_measure(rng, n, k, trial, dim);
        const double tv = total_variation(mu);
        const double e = detail::energy_signed(spec, mu, k);
        worst = std::max(worst, std::max(0.0, -e) / (tv * tv + 1e-300));
    }
    return detail::make_report("pdi_random", trials, worst, tol, seed);
}

/// Same check for a raw kernel evaluator g(t_1, ..., t_n) of claimed order k.
[[nodiscard]] inline VerifyReport pdi_random_check(
    const std::function<double(const std::vector<double>&)>& g, int n, int k, int trials,
    std::uint64_t seed, double tol = 1e-9, int dim = 0) {
    if (trials < 1) throw arity_error("pdi_random_check: need at least one trial");
    if (dim < 0 || dim > 8) throw arity_error("pdi_random_check: dim must be in [0, 8]");
    if (n < 1 || n > 16) throw arity_error("pdi_random_check: n must be in [1, 16]");
    if (k < 1 || k > n) throw arity_error("pdi_random_check: k must be in [1, n]");
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const DiscreteMeasure mu = detail::random_mk_measure(rng, n, k, trial, dim);
        const double tv = total_variation(mu);
        const double e = detail::energy_of(g, mu, k);
        worst = std::max(worst, std::max(0.0, -e) / (tv * tv + 1e-300));
    }
    return detail::make_report("pdi_random", trials, worst, tol, seed);
}

/// Randomized checks of the scalar inequalities behind the kernel bounds.
/// Each family gets its own report; violations are normalized by the
/// magnitude of the bounding side.
[[nodiscard]] inline std::vector<VerifyReport> inequality_suite(int trials, std::uint64_t seed) {
    if (trials < 1) throw arity_error("inequality_suite: need at least one trial");
    constexpr double tol = 1e-10, floor = 1e-14;
    std::vector<VerifyReport> out;

    const auto rel = [&](double gap, double scale) { return std::max(0.0, gap) / (std::abs(scale) + floor); };

    { // 1 <= (1 - e^{-s})(1 + s)/s <= 2 for s > 0
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const double s = std::exp(detail::uniform(rng, -6.0, 3.0));
            const double f = -std::expm1(-s) * (1.0 + s) / s;
            worst = std::max({worst, rel(1.0 - f, 1.0), rel(f - 2.0, 2.0)});
        }
        out.push_back(detail::make_report("bern1ineq", trials, worst, tol, seed));
    }
    { // min(1, t) <= (1 - e^{-rt})(1 + r)/r <= 2 max(1, t); value t at r = 0
        std::mt19937_64 rng(seed + 1);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const double t = std::exp(detail::uniform(rng, -4.0, 3.0));
            const double r = (i % 8 == 0) ? 0.0 : std::exp(detail::uniform(rng, -6.0, 3.0));
            const double f = (r == 0.0) ? t : -std::expm1(-r * t) * (1.0 + r) / r;
            worst = std::max({worst, rel(std::min(1.0, t) - f, std::min(1.0, t)),
                              rel(f - 2.0 * std::max(1.0, t), 2.0 * std::max(1.0, t))});
        }
        out.push_back(detail::make_report("bern1ineq2", trials, worst, tol, seed + 1));
    }
    { // 0 <= binom(n,k)^{-1} p_k(1-a) <= (-1)^k H_k(a) <= p_k(1-a) on [0,1]^n
        std::mt19937_64 rng(seed + 2);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const int n = 2 + static_cast<int>(detail::bounded(rng, 5));
            const int k = 1 + static_cast<int>(detail::bounded(rng, static_cast<std::uint64_t>(n)));
            std::vector<double> a(static_cast<std::size_t>(n)), ca(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(j)] = detail::u01(rng);
                ca[static_cast<std::size_t>(j)] = 1.0 - a[static_cast<std::size_t>(j)];
            }
            const double pk = elem_sym_poly(ca, k);
            const double h = ((k % 2 == 0) ? 1.0 : -1.0) * h_poly(a, k);
            const double lo = pk / static_cast<double>(binom(n, k));
            worst = std::max({worst, rel(-lo, 1.0), rel(lo - h, pk), rel(h - pk, pk)});
        }
        out.push_back(detail::make_report("ineqorderk2eq1", trials, worst, tol, seed + 2));
    }
    { // [sum_{j<=k} p_j(r)] prod_F r_i <= p_k(r) prod_F (1 + r_i), |F| = k
        std::mt19937_64 rng(seed + 3);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const int n = 2 + static_cast<int>(detail::bounded(rng, 5));
            const int k = 1 + static_cast<int>(detail::bounded(rng, static_cast<std::uint64_t>(n)));
            std::vector<double> r(static_cast<std::size_t>(n));
            for (auto& v : r) v = std::exp(detail::uniform(rng, -2.0, 2.0));
            std::vector<int> order(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
            for (int j = n - 1; j > 0; --j)
                std::swap(order[static_cast<std::size_t>(j)],
                          order[detail::bounded(rng, static_cast<std::uint64_t>(j) + 1)]);
            double lhs = 0.0;
            const auto prefix = elem_sym_poly_prefix(r, k);
            for (const double p : prefix) lhs += p;
            double rf = 1.0, rf1 = 1.0;
            for (int j = 0; j < k; ++j) {
                rf *= r[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
                rf1 *= 1.0 + r[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
            }
            const double rhs = elem_sym_poly(r, k) * rf1;
            worst = std::max(worst, rel(lhs * rf - rhs, rhs));
        }
        out.push_back(detail::make_report("ineqdifforderkradial0", trials, worst, tol, seed + 3));
    }
    { // sum_{j<=k} p_j(r) <= p_k(1 + r) <= binom(n,k) sum_{j<=k} p_j(r)
        std::mt19937_64 rng(seed + 4);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const int n = 2 + static_cast<int>(detail::bounded(rng, 5));
            const int k = 1 + static_cast<int>(detail::bounded(rng, static_cast<std::uint64_t>(n)));
            std::vector<double> r(static_cast<std::size_t>(n)), r1(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                r[static_cast<std::size_t>(j)] = std::exp(detail::uniform(rng, -2.0, 2.0));
                r1[static_cast<std::size_t>(j)] = 1.0 + r[static_cast<std::size_t>(j)];
            }
            double lhs = 0.0;
            for (const double p : elem_sym_poly_prefix(r, k)) lhs += p;
            const double mid = elem_sym_poly(r1, k);
            const double rhs = static_cast<double>(binom(n, k)) * lhs;
            worst = std::max({worst, rel(lhs - mid, mid), rel(mid - rhs, rhs)});
        }
        out.push_back(detail::make_report("eqpkn+1pkn", trials, worst, tol, seed + 4));
    }
    { // g(t1) <= [prod max(1, t1_i/t2_i)] g(t2) for mixtures of products of
      // (1 - e^{-rt})(1 + r)/r
        std::mt19937_64 rng(seed + 5);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const int n = 2 + static_cast<int>(detail::bounded(rng, 5));
            const int terms = 1 + static_cast<int>(detail::bounded(rng, 3));
            std::vector<double> w(static_cast<std::size_t>(terms));
            std::vector<std::vector<double>> rr(static_cast<std::size_t>(terms),
                                                std::vector<double>(static_cast<std::size_t>(n)));
            for (int j = 0; j < terms; ++j) {
                w[static_cast<std::size_t>(j)] = detail::u01(rng) + 0.05;
                for (auto& v : rr[static_cast<std::size_t>(j)]) v = std::exp(detail::uniform(rng, -3.0, 2.0));
            }
            const auto g = [&](const std::vector<double>& t) {
                double s = 0.0;
                for (int j = 0; j < terms; ++j) {
                    double p = w[static_cast<std::size_t>(j)];
                    for (int q = 0; q < n; ++q) {
                        const double r = rr[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)];
                        p *= -std::expm1(-r * t[static_cast<std::size_t>(q)]) * (1.0 + r) / r;
                    }
                    s += p;
                }
                return s;
            };
            std::vector<double> t1(static_cast<std::size_t>(n)), t2(static_cast<std::size_t>(n));
            double factor = 1.0;
            for (int q = 0; q < n; ++q) {
                t1[static_cast<std::size_t>(q)] = std::exp(detail::uniform(rng, -2.0, 2.0));
                t2[static_cast<std::size_t>(q)] = std::exp(detail::uniform(rng, -2.0, 2.0));
                factor *= std::max(1.0, t1[static_cast<std::size_t>(q)] / t2[static_cast<std::size_t>(q)]);
            }
            const double rhs = factor * g(t2);
            worst = std::max(worst, rel(g(t1) - rhs, rhs));
        }
        out.push_back(detail::make_report("consineqexp", trials, worst, tol, seed + 5));
    }
    { // g(t1 + t2) <= sum over coordinate selections alpha of g(t_alpha)
        std::mt19937_64 rng(seed + 6);
        double worst = 0.0;
        for (int i = 0; i < trials; ++i) {
            const int n = 2 + static_cast<int>(detail::bounded(rng, 4));
            const int terms = 1 + static_cast<int>(detail::bounded(rng, 3));
            std::vector<double> w(static_cast<std::size_t>(terms));
            std::vector<std::vector<double>> rr(static_cast<std::size_t>(terms),
                                                std::vector<double>(static_cast<std::size_t>(n)));
            for (int j = 0; j < terms; ++j) {
                w[static_cast<std::size_t>(j)] = detail::u01(rng) + 0.05;
                for (auto& v : rr[static_cast<std::size_t>(j)]) v = std::exp(detail::uniform(rng, -3.0, 2.0));
            }
            const auto g = [&](const std::vector<double>& t) {
                double s = 0.0;
                for (int j = 0; j < terms; ++j) {
                    double p = w[static_cast<std::size_t>(j)];
                    for (int q = 0; q < n; ++q) {
                        const double r = rr[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)];
                        p *= -std::expm1(-r * t[static_cast<std::size_t>(q)]) * (1.0 + r) / r;
                    }
                    s += p;
                }
                return s;
            };
            std::vector<double> t1(static_cast<std::size_t>(n)), t2(static_cast<std::size_t>(n)),
                sum(static_cast<std::size_t>(n));
            for (int q = 0; q < n; ++q) {
                t1[static_cast<std::size_t>(q)] = std::exp(detail::uniform(rng, -2.0, 1.5));
                t2[static_cast<std::size_t>(q)] = std::exp(detail::uniform(rng, -2.0, 1.5));
                sum[static_cast<std::size_t>(q)] = t1[static_cast<std::size_t>(q)] + t2[static_cast<std::size_t>(q)];
            }
            double rhs = 0.0;
            std::vector<double> pick(static_cast<std::size_t>(n));
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                for (int q = 0; q < n; ++q)
                    pick[static_cast<std::size_t>(q)] =
                        ((mask >> q) & 1u) ? t2[static_cast<std::size_t>(q)] : t1[static_cast<std::size_t>(q)];
                rhs += g(pick);
            }
            worst = std::max(worst, rel(g(sum) - rhs, rhs));
        }
        out.push_back(detail::make_report("convexexp", trials, worst, tol, seed + 6));
    }
    return out;
}

} // namespace ikern
