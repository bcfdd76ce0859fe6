#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/interactions.hpp"
#include "ikern/kernels.hpp"
#include "ikern/measure.hpp"

namespace ikern {

enum class StatMode { lancaster, streitberg };

namespace detail {

/// Measure with per-variable block values interned to indices, so distance
/// and kernel values can be table lookups.
struct Interned {
    int n = 0;
    std::vector<double> weights;
    std::vector<std::vector<int>> codes;    // [var][atom] -> value index
    std::vector<std::vector<Block>> values; // [var][index] -> block value
};

[[nodiscard]] inline Interned intern_measure(const DiscreteMeasure& mu) {
    Interned out;
    out.n = mu.shape.vars();
    out.codes.assign(static_cast<std::size_t>(out.n), {});
    out.values.assign(static_cast<std::size_t>(out.n), {});
    std::vector<std::map<Block, int>> lut(static_cast<std::size_t>(out.n));
    for (const auto& [pt, w] : mu.atoms) {
        out.weights.push_back(w);
        for (int i = 0; i < out.n; ++i) {
            auto& table = lut[static_cast<std::size_t>(i)];
            const auto [it, fresh] =
                table.try_emplace(pt[static_cast<std::size_t>(i)], static_cast<int>(table.size()));
            if (fresh) out.values[static_cast<std::size_t>(i)].push_back(pt[static_cast<std::size_t>(i)]);
            out.codes[static_cast<std::size_t>(i)].push_back(it->second);
        }
    }
    return out;
}

[[nodiscard]] inline double block_distance(const Block& a, const Block& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
    }
    return std::sqrt(s);
}

/// Signed quadratic form (-1)^sign_order * sum_{u,v} w_u w_v g(d(x_u, x_v)).
/// Per-variable distance matrices when affordable, per-factor value tables
/// for product kernels; otherwise plain per-pair evaluation.  One finite sum
/// either way.
[[nodiscard]] inline double signed_pair_energy(const KernelSpec& spec, const DiscreteMeasure& mu,
                                               int sign_order) {
    const Interned im = intern_measure(mu);
    const std::size_t A = im.weights.size();
    if (A == 0) return 0.0;
    const int n = im.n;

    std::size_t table_cells = 0;
    for (const auto& vals : im.values) table_cells += vals.size() * vals.size();
    const bool tabulate = table_cells <= std::size_t{8} * 1000 * 1000;

    std::vector<std::vector<double>> dist(static_cast<std::size_t>(n));
    if (tabulate)
        for (int i = 0; i < n; ++i) {
            const auto& vals = im.values[static_cast<std::size_t>(i)];
            const std::size_t v = vals.size();
            auto& d = dist[static_cast<std::size_t>(i)];
            d.assign(v * v, 0.0);
            for (std::size_t a = 0; a < v; ++a)
                for (std::size_t b = a + 1; b < v; ++b)
                    d[a * v + b] = d[b * v + a] = block_distance(vals[a], vals[b]);
        }

    const double sign = (sign_order % 2 == 0) ? 1.0 : -1.0;
    long double acc = 0.0L;

    if (const auto* p = std::get_if<ProductBernstein>(&spec); p != nullptr && tabulate) {
        // Per-variable kernel tables make the pair loop multiplication-only.
        std::vector<std::vector<double>> kt(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto& d = dist[static_cast<std::size_t>(i)];
            auto& t = kt[static_cast<std::size_t>(i)];
            t.resize(d.size());
            for (std::size_t c = 0; c < d.size(); ++c) t[c] = p->parts[static_cast<std::size_t>(i)](d[c]);
        }
        for (std::size_t u = 0; u < A; ++u)
            for (std::size_t v = u; v < A; ++v) {
                double g = 1.0;
                for (int i = 0; i < n; ++i) {
                    const auto& codes = im.codes[static_cast<std::size_t>(i)];
                    const std::size_t w = im.values[static_cast<std::size_t>(i)].size();
                    g *= kt[static_cast<std::size_t>(i)][static_cast<std::size_t>(codes[u]) * w +
                                                         static_cast<std::size_t>(codes[v])];
                }
                const double pairw = im.weights[u] * im.weights[v];
                acc += static_cast<long double>((u == v ? 1.0 : 2.0) * pairw * g);
            }
        return sign * static_cast<double>(acc);
    }

    std::vector<double> d(static_cast<std::size_t>(n));
    for (std::size_t u = 0; u < A; ++u)
        for (std::size_t v = u; v < A; ++v) {
            for (int i = 0; i < n; ++i) {
                const auto& codes = im.codes[static_cast<std::size_t>(i)];
                if (tabulate) {
                    const std::size_t w = im.values[static_cast<std::size_t>(i)].size();
                    d[static_cast<std::size_t>(i)] =
                        dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(codes[u]) * w +
                                                          static_cast<std::size_t>(codes[v])];
                } else {
                    d[static_cast<std::size_t>(i)] =
                        block_distance(im.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(codes[u])],
                                       im.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(codes[v])]);
                }
            }
            const double g = eval_kernel_unchecked(spec, d);
            const double pairw = im.weights[u] * im.weights[v];
            acc += static_cast<long double>((u == v ? 1.0 : 2.0) * pairw * g);
        }
    return sign * static_cast<double>(acc);
}

/// Energy with the sign chosen by the caller, without insisting that the
/// order matches the kernel; the verification suite probes kernels at
/// foreign orders through this.
[[nodiscard]] inline double energy_signed(const KernelSpec& spec, const DiscreteMeasure& mu, int k) {
    validate_kernel(spec);
    if (mu.shape.vars() != kernel_vars(spec))
        throw shape_error("energy: measure shape does not match kernel");
    return signed_pair_energy(spec, mu, k);
}

} // namespace detail

/// Signed quadratic-form energy (-1)^k integral integral g d(mu) d(mu) of a
/// finitely supported signed measure; nonnegative (up to round-off) whenever
/// g has the positive-definiteness of order k and mu is in M_k.  The order k
/// must match the kernel's own order.
[[nodiscard]] inline double quadratic_energy(const KernelSpec& spec, const DiscreteMeasure& mu, int k) {
    validate_kernel(spec);
    if (k != kernel_order(spec))
        throw arity_error("quadratic_energy: k must match the kernel's order");
    if (mu.shape.vars() != kernel_vars(spec))
        throw shape_error("quadratic_energy: measure shape does not match kernel");
    return detail::signed_pair_energy(spec, mu, k);
}

namespace detail {

// ---- factored cross-term engine over empirical samples -------------------

/// One multiplicative factor of a product-expressible kernel term.
struct UnaryFactor {
    bool exp_decay = false; // e^{-rate d} (order-k radial piece) vs Bernstein
    Bernstein1D bernstein{};
    double rate = 1.0;

    [[nodiscard]] double operator()(double d) const {
        return exp_decay ? std::exp(-rate * d) : bernstein(d);
    }
    [[nodiscard]] friend bool operator<(const UnaryFactor& a, const UnaryFactor& b) {
        const auto key = [](const UnaryFactor& f) {
            return std::tuple<int, int, double, double>(
                f.exp_decay ? 1 : 0, static_cast<int>(f.bernstein.family), f.bernstein.param, f.rate);
        };
        return key(a) < key(b);
    }
};

struct ExpTermFactor {
    int var = 0;
    int table = 0; // index into the engine's table pool
};

struct ExpTerm {
    double coeff = 1.0;
    std::vector<ExpTermFactor> factors; // vars strictly ascending
};

/// g(t) = sum_T coeff_T prod_{(i, f) in T} f(t_i), when the kernel family
/// admits it (products and order-k radial kernels; the additive CM family
/// does not, its terms couple variables through subset sums).
[[nodiscard]] inline std::optional<std::vector<std::pair<double, std::vector<std::pair<int, UnaryFactor>>>>>
product_terms(const KernelSpec& spec) {
    using Term = std::pair<double, std::vector<std::pair<int, UnaryFactor>>>;
    std::vector<Term> terms;
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) {
        Term t{1.0, {}};
        for (std::size_t i = 0; i < p->parts.size(); ++i)
            t.second.emplace_back(static_cast<int>(i), UnaryFactor{false, p->parts[i], 1.0});
        terms.push_back(std::move(t));
        return terms;
    }
    const auto* o = std::get_if<OrderKKernel>(&spec);
    if (o == nullptr) return std::nullopt; // sum-CM couples variables additively
    for (const auto& cross : o->cross) {
        Term t{1.0, {}};
        for (std::size_t i = 0; i < cross.vars.size(); ++i)
            t.second.emplace_back(cross.vars[i], UnaryFactor{false, cross.parts[i], 1.0});
        terms.push_back(std::move(t));
    }
    const double sign = (o->k % 2 == 0) ? 1.0 : -1.0;
    for (const auto& atom : o->eta) {
        const double base = atom.w * sign * shifted_ratio(atom.r, o->k);
        // E_k^n(r . t) expands layer by layer into elementary symmetric
        // monomials of e^{-r_i t_i}: the full product plus every subset of
        // size below k with its layer coefficient.
        for (std::uint32_t mask = 0; mask < (1u << o->n); ++mask) {
            const int j = std::popcount(mask);
            double coeff;
            if (j == o->n) coeff = base;
            else if (j <= o->k - 1) coeff = base * layer_coefficient(o->n, o->k, j);
            else continue;
            Term t{coeff, {}};
            for (int i = 0; i < o->n; ++i)
                if ((mask >> i) & 1u)
                    t.second.emplace_back(i, UnaryFactor{true, Bernstein1D{}, atom.r[static_cast<std::size_t>(i)]});
            terms.push_back(std::move(t));
        }
    }
    return terms;
}

/// Empirical cross-term engine: evaluates the order-k interaction energy of
/// a sample as sums of products of per-variable Gram row/grand means,
/// without materializing the interaction measure.  Column permutations enter
/// as row re-indexings of fixed tables, which is what makes the permutation
/// loop cheap.
struct CrossTermEngine {
    int n = 0, k = 0, m = 0;
    double sign = 1.0;
    std::vector<std::pair<double, std::uint32_t>> comps; // (coeff, joint-variable mask)
    std::vector<ExpTerm> terms;
    std::vector<std::vector<double>> K; // per table: m*m kernel values
    std::vector<std::vector<double>> R; // per table: row means
    std::vector<double> G;              // per table: grand mean

    [[nodiscard]] double eval(const std::vector<std::vector<int>>& sigma) const {
        long double total = 0.0L;
        std::vector<double> left(static_cast<std::size_t>(m));
        for (const auto& [cu, ju] : comps)
            for (const auto& [cv, jv] : comps) {
                const double cc = cu * cv;
                for (const auto& term : terms) {
                    double outside = 1.0;
                    bool coupled = false;
                    for (const auto& f : term.factors) {
                        const bool inu = (ju >> f.var) & 1u, inv = (jv >> f.var) & 1u;
                        if (inu && inv) coupled = true;
                        else if (!inu && !inv) outside *= G[static_cast<std::size_t>(f.table)];
                    }
                    long double inner = 0.0L;
                    if (!coupled) {
                        long double la = 0.0L, lb = 0.0L;
                        for (int a = 0; a < m; ++a) {
                            double pa = 1.0, pb = 1.0;
                            for (const auto& f : term.factors) {
                                const bool inu = (ju >> f.var) & 1u, inv = (jv >> f.var) & 1u;
                                const int ra = sigma[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(a)];
                                if (inu && !inv) pa *= R[static_cast<std::size_t>(f.table)][static_cast<std::size_t>(ra)];
                                if (inv && !inu) pb *= R[static_cast<std::size_t>(f.table)][static_cast<std::size_t>(ra)];
                            }
                            la += pa;
                            lb += pb;
                        }
                        inner = (la / m) * (lb / m);
                    } else {
                        for (int a = 0; a < m; ++a) {
                            double pa = 1.0;
                            for (const auto& f : term.factors) {
                                const bool inu = (ju >> f.var) & 1u, inv = (jv >> f.var) & 1u;
                                if (inu && !inv)
                                    pa *= R[static_cast<std::size_t>(f.table)][static_cast<std::size_t>(
                                        sigma[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(a)])];
                            }
                            left[static_cast<std::size_t>(a)] = pa;
                        }
                        for (int b = 0; b < m; ++b) {
                            double pb = 1.0;
                            for (const auto& f : term.factors) {
                                const bool inu = (ju >> f.var) & 1u, inv = (jv >> f.var) & 1u;
                                if (inv && !inu)
                                    pb *= R[static_cast<std::size_t>(f.table)][static_cast<std::size_t>(
                                        sigma[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(b)])];
                            }
                            long double row = 0.0L;
                            for (int a = 0; a < m; ++a) {
                                double pk = left[static_cast<std::size_t>(a)];
                                for (const auto& f : term.factors) {
                                    const bool inu = (ju >> f.var) & 1u, inv = (jv >> f.var) & 1u;
                                    if (inu && inv)
                                        pk *= K[static_cast<std::size_t>(f.table)][static_cast<std::size_t>(
                                                  sigma[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(a)]) *
                                                  static_cast<std::size_t>(m) +
                                              static_cast<std::size_t>(
                                                  sigma[static_cast<std::size_t>(f.var)][static_cast<std::size_t>(b)])];
                                }
                                row += pk;
                            }
                            inner += row * pb;
                        }
                        inner /= static_cast<long double>(m) * m;
                    }
                    total += static_cast<long double>(cc * term.coeff * outside) * inner;
                }
            }
        return sign * static_cast<double>(total);
    }
};

[[nodiscard]] inline std::optional<CrossTermEngine> build_cross_term_engine(
    const std::vector<ProductPoint>& sample, const SpaceShape& shape, int k, const KernelSpec& spec) {
    auto raw_terms = product_terms(spec);
    if (!raw_terms) return std::nullopt;

    CrossTermEngine e;
    e.n = shape.vars();
    e.k = k;
    e.m = static_cast<int>(sample.size());
    e.sign = (k % 2 == 0) ? 1.0 : -1.0;

    // Interaction components: the joint empirical measure plus every layer
    // P_F x (singles outside F), |F| < k.
    e.comps.emplace_back(1.0, (std::uint32_t{1} << e.n) - 1u);
    for (std::uint32_t mask = 0; mask < (1u << e.n); ++mask) {
        const int j = std::popcount(mask);
        if (j <= k - 1) e.comps.emplace_back(layer_coefficient(e.n, k, j), mask);
    }

    // Deduplicate factor tables across terms.
    std::map<std::pair<int, UnaryFactor>, int> pool;
    for (const auto& [coeff, factors] : *raw_terms) {
        ExpTerm t;
        t.coeff = coeff;
        for (const auto& [var, f] : factors) {
            const auto [it, fresh] = pool.try_emplace({var, f}, static_cast<int>(pool.size()));
            t.factors.push_back({var, it->second});
        }
        e.terms.push_back(std::move(t));
    }
    e.K.resize(pool.size());
    e.R.resize(pool.size());
    e.G.resize(pool.size());
    const auto msize = static_cast<std::size_t>(e.m);
    for (const auto& [key, id] : pool) {
        const auto& [var, f] = key;
        auto& K = e.K[static_cast<std::size_t>(id)];
        K.assign(msize * msize, 0.0);
        for (std::size_t a = 0; a < msize; ++a)
            for (std::size_t b = a; b < msize; ++b) {
                const double d = block_distance(sample[a][static_cast<std::size_t>(var)],
                                                sample[b][static_cast<std::size_t>(var)]);
                K[a * msize + b] = K[b * msize + a] = f(d);
            }
        auto& R = e.R[static_cast<std::size_t>(id)];
        R.assign(msize, 0.0);
        long double grand = 0.0L;
        for (std::size_t a = 0; a < msize; ++a) {
            long double row = 0.0L;
            for (std::size_t b = 0; b < msize; ++b) row += K[a * msize + b];
            R[a] = static_cast<double>(row / e.m);
            grand += row;
        }
        e.G[static_cast<std::size_t>(id)] = static_cast<double>(grand / (static_cast<long double>(e.m) * e.m));
    }
    return e;
}

[[nodiscard]] inline std::vector<std::vector<int>> identity_maps(int n, int m) {
    std::vector<std::vector<int>> sigma(static_cast<std::size_t>(n));
    for (auto& s : sigma) {
        s.resize(static_cast<std::size_t>(m));
        for (int a = 0; a < m; ++a) s[static_cast<std::size_t>(a)] = a;
    }
    return sigma;
}

/// Upper bound on the materialized interaction support, saturating.
[[nodiscard]] inline double materialized_bound(const std::vector<ProductPoint>& sample,
                                               const SpaceShape& shape, int k) {
    const int n = shape.vars();
    const auto m = static_cast<double>(sample.size());
    std::vector<std::map<Block, int>> lut(static_cast<std::size_t>(n));
    for (const auto& row : sample)
        for (int i = 0; i < n; ++i)
            lut[static_cast<std::size_t>(i)].try_emplace(row[static_cast<std::size_t>(i)], 0);
    std::vector<double> V(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i)] = static_cast<double>(lut[static_cast<std::size_t>(i)].size());
    double bound = m;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const int j = std::popcount(mask);
        if (j > k - 1) continue;
        double inside = 1.0, outside = 1.0;
        for (int i = 0; i < n; ++i)
            ((mask >> i) & 1u ? inside : outside) *= V[static_cast<std::size_t>(i)];
        bound += std::min(m, inside) * outside;
        if (bound > 1e15) return bound;
    }
    return bound;
}

/// Upper bound on the value grid spanned by the sample, saturating; every
/// partition term of the Streitberg combination is supported inside it.
[[nodiscard]] inline double grid_bound(const std::vector<ProductPoint>& sample,
                                       const SpaceShape& shape) {
    const int n = shape.vars();
    std::vector<std::map<Block, int>> lut(static_cast<std::size_t>(n));
    for (const auto& row : sample)
        for (int i = 0; i < n; ++i)
            lut[static_cast<std::size_t>(i)].try_emplace(row[static_cast<std::size_t>(i)], 0);
    double bound = 1.0;
    for (const auto& l : lut) {
        bound *= static_cast<double>(l.size());
        if (bound > 1e15) return bound;
    }
    return bound;
}

[[nodiscard]] inline DiscreteMeasure empirical_measure(const std::vector<ProductPoint>& sample,
                                                       const SpaceShape& shape) {
    std::vector<std::pair<ProductPoint, double>> atoms;
    atoms.reserve(sample.size());
    const double w = 1.0 / static_cast<double>(sample.size());
    for (const auto& row : sample) atoms.emplace_back(row, w);
    return from_atoms(shape, atoms);
}

} // namespace detail

/// Materialization threshold for the interaction statistic: past this many
/// (bounded) support atoms the factored cross-term engine takes over.
inline constexpr double materialize_atom_limit = 50000.0;

/// Order-k interaction statistic of an i.i.d. sample: the signed energy of
/// the empirical interaction measure (Lancaster remainder, or the Streitberg
/// combination when mode is streitberg, which requires k = n <= 10).
[[nodiscard]] inline double interaction_statistic(const std::vector<ProductPoint>& sample,
                                                  const SpaceShape& shape, int k,
                                                  const KernelSpec& spec, StatMode mode) {
    validate_kernel(spec);
    if (sample.empty())
        throw arity_error("interaction_statistic: empty sample");
    if (shape.vars() != kernel_vars(spec))
        throw shape_error("interaction_statistic: shape does not match kernel");
    if (k != kernel_order(spec))
        throw arity_error("interaction_statistic: k must match the kernel's order");
    for (const auto& row : sample) (void)detail::flatten_point(shape, row);

    if (mode == StatMode::streitberg) {
        if (k != shape.vars())
            throw arity_error("interaction_statistic: streitberg requires k = n");
        if (shape.vars() > 10)
            throw arity_error("interaction_statistic: streitberg supported up to 10 variables");
        if (detail::grid_bound(sample, shape) > materialize_atom_limit)
            throw input_error("interaction_statistic: streitberg must materialize the interaction "
                              "measure and the sample's value grid exceeds the atom limit; reduce "
                              "the sample size or the number of distinct values per variable");
        return detail::signed_pair_energy(spec, streitberg(detail::empirical_measure(sample, shape)), k);
    }

    detail::check_order(k, shape.vars());
    if (detail::materialized_bound(sample, shape, k) <= materialize_atom_limit)
        return detail::signed_pair_energy(spec, lancaster(detail::empirical_measure(sample, shape), k), k);
    const auto engine = detail::build_cross_term_engine(sample, shape, k, spec);
    if (!engine) // additive CM kernel: no factored path, refuse huge supports
        throw input_error("interaction_statistic: this kernel has no factored path and the "
                          "materialized interaction support would exceed the atom limit; reduce "
                          "the sample size or the number of distinct values per variable");
    return engine->eval(detail::identity_maps(shape.vars(), static_cast<int>(sample.size())));
}

struct PermutationResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

namespace detail {

inline void fisher_yates(std::vector<int>& idx, std::mt19937_64& rng) {
    for (std::size_t j = idx.size() - 1; j > 0; --j) {
        const std::uint64_t bound = j + 1;
        const std::uint64_t cut =
            std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r = rng();
        while (r >= cut) r = rng(); // rejection keeps the draw exactly uniform
        std::swap(idx[j], idx[static_cast<std::size_t>(r % bound)]);
    }
}

} // namespace detail

/// Permutation test against the independence null: every variable's column
/// is permuted independently in each of the B replicates, and
/// p = (1 + #{replicate statistic >= observed}) / (B + 1).  Deterministic
/// for a fixed seed; replicates reuse the factored engine's fixed tables
/// when the kernel admits them.
[[nodiscard]] inline PermutationResult permutation_pvalue(const std::vector<ProductPoint>& sample,
                                                          const SpaceShape& shape, int k,
                                                          const KernelSpec& spec, StatMode mode,
                                                          int permutations, std::uint64_t seed) {
    if (permutations < 1)
        throw arity_error("permutation_pvalue: need at least one permutation");
    if (sample.size() < 2)
        throw arity_error("permutation_pvalue: need at least two samples");

    PermutationResult out;
    out.statistic = interaction_statistic(sample, shape, k, spec, mode);

    const int n = shape.vars();
    const int m = static_cast<int>(sample.size());
    std::optional<detail::CrossTermEngine> engine;
    if (mode == StatMode::lancaster) engine = detail::build_cross_term_engine(sample, shape, k, spec);

    std::mt19937_64 rng(seed);
    auto sigma = detail::identity_maps(n, m);
    std::vector<ProductPoint> permuted = sample;
    int exceed = 0;
    for (int b = 0; b < permutations; ++b) {
        for (auto& s : sigma) detail::fisher_yates(s, rng);
        double stat;
        if (engine) {
            stat = engine->eval(sigma);
        } else {
            for (int a = 0; a < m; ++a)
                for (int i = 0; i < n; ++i)
                    permuted[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] =
                        sample[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)])]
                              [static_cast<std::size_t>(i)];
            stat = interaction_statistic(permuted, shape, k, spec, mode);
        }
        if (stat >= out.statistic) ++exceed;
    }
    out.p_value = (1.0 + exceed) / (static_cast<double>(permutations) + 1.0);
    return out;
}

} // namespace ikern
