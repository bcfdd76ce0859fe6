#pragma once

#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/measure.hpp"
#include "ikern/partitions.hpp"
#include "ikern/symfun.hpp"

namespace ikern {

namespace detail {

inline void check_order(int k, int n) {
    if (n < 1 || n > 16)
        throw arity_error("interaction: variable count must be in [1, 16]");
    if (k < 1 || k > n)
        throw arity_error("interaction: order k must be in [1, n]");
}

inline void check_probability(const DiscreteMeasure& P, const char* who) {
    if (std::abs(total_mass(P) - 1.0) > 1e-9)
        throw mass_error(std::string(who) + ": measure must be a probability");
}

} // namespace detail

/// Lambda_k^n[P, Q] = P + sum_{j=0}^{k-1} (-1)^{k-j} C(n-j-1, n-k)
///                        sum_{|F|=j} P_F x Q_{F^c},
/// the order-k interaction remainder of P relative to the reference Q; the
/// F^c marginal is Q's joint marginal, so any probability Q works.  Always a
/// member of M_k.  Both measures must be probabilities on a common shape.
[[nodiscard]] inline DiscreteMeasure lancaster_general(const DiscreteMeasure& P,
                                                       const DiscreteMeasure& Q, int k) {
    const int n = P.shape.vars();
    detail::check_order(k, n);
    if (!(P.shape == Q.shape))
        throw shape_error("lancaster_general: shapes differ");
    detail::check_probability(P, "lancaster_general");
    detail::check_probability(Q, "lancaster_general");

    detail::FlatMap acc;
    for (const auto& [pt, w] : P.atoms) acc[detail::flatten_point(P.shape, pt)] += w;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const int j = std::popcount(mask);
        if (j > k - 1) continue;
        const double coeff = detail::layer_coefficient(n, k, j);
        std::vector<int> inside, outside;
        for (int i = 0; i < n; ++i)
            ((mask >> i) & 1u ? inside : outside).push_back(i);
        const DiscreteMeasure QFc = marginal(Q, outside); // outside is never empty: j <= k-1 < n
        if (inside.empty()) {
            for (const auto& [pt, w] : QFc.atoms)
                acc[detail::flatten_point(P.shape, pt)] += coeff * w;
            continue;
        }
        const DiscreteMeasure PF = marginal(P, inside);
        ProductPoint joined(static_cast<std::size_t>(n));
        for (const auto& [ppt, pw] : PF.atoms)
            for (const auto& [qpt, qw] : QFc.atoms) {
                for (std::size_t a = 0; a < inside.size(); ++a)
                    joined[static_cast<std::size_t>(inside[a])] = ppt[a];
                for (std::size_t a = 0; a < outside.size(); ++a)
                    joined[static_cast<std::size_t>(outside[a])] = qpt[a];
                acc[detail::flatten_point(P.shape, joined)] += coeff * pw * qw;
            }
    }
    return detail::from_flat(P.shape, acc);
}

/// Lambda_k^n[P] with the default reference Q = tensor product of P's
/// single-variable marginals.
[[nodiscard]] inline DiscreteMeasure lancaster(const DiscreteMeasure& P, int k) {
    const int n = P.shape.vars();
    detail::check_order(k, n);
    detail::check_probability(P, "lancaster");
    std::vector<DiscreteMeasure> singles;
    singles.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) singles.push_back(marginal(P, {i}));
    return lancaster_general(P, product(singles), k);
}

/// The two-point witness mu_k^n[x, y] = Lambda_k^n[delta_x, delta_y],
/// written out directly:
///   delta_x + sum_{j=0}^{k-1} (-1)^{k-j} C(n-j-1, n-k)
///             sum_{|F|=j} delta_{(x_F, y_{F^c})}.
/// Integer-valued weights, so the construction is exact; x = y collapses to
/// the zero measure.
[[nodiscard]] inline DiscreteMeasure mu_kn(const ProductPoint& x, const ProductPoint& y,
                                           int k, const SpaceShape& shape) {
    const int n = shape.vars();
    detail::check_order(k, n);
    std::vector<std::pair<ProductPoint, double>> atoms;
    atoms.emplace_back(x, 1.0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const int j = std::popcount(mask);
        if (j > k - 1) continue;
        const double coeff = detail::layer_coefficient(n, k, j);
        ProductPoint mixed(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            mixed[static_cast<std::size_t>(i)] =
                ((mask >> i) & 1u) ? x[static_cast<std::size_t>(i)] : y[static_cast<std::size_t>(i)];
        atoms.emplace_back(std::move(mixed), coeff);
    }
    return from_atoms(shape, atoms);
}

/// Streitberg interaction Sigma[P] = sum_pi (-1)^{|pi|-1} (|pi|-1)! P_pi
/// over all set partitions of the variables; vanishes identically whenever P
/// decomposes across any partition, and always lies in M_n.  Supported for
/// n <= 10 (Bell(10) = 115975 partitions).
[[nodiscard]] inline DiscreteMeasure streitberg(const DiscreteMeasure& P) {
    const int n = P.shape.vars();
    if (n < 1 || n > 10)
        throw arity_error("streitberg: variable count must be in [1, 10]");
    detail::check_probability(P, "streitberg");

    // Block marginals depend only on the variable subset: cache per mask.
    std::vector<DiscreteMeasure> marg_cache(std::size_t{1} << n);
    std::vector<bool> cached(std::size_t{1} << n, false);
    const auto subset_marginal = [&](std::uint32_t mask) -> const DiscreteMeasure& {
        if (!cached[mask]) {
            std::vector<int> keep;
            for (int i = 0; i < n; ++i)
                if ((mask >> i) & 1u) keep.push_back(i);
            marg_cache[mask] = marginal(P, keep);
            cached[mask] = true;
        }
        return marg_cache[mask];
    };

    detail::FlatMap acc;
    ProductPoint scratch(static_cast<std::size_t>(n));
    for (const auto& rgs : enumerate_partitions(n)) {
        const auto blocks = rgs_blocks(rgs);
        const double coeff = static_cast<double>(streitberg_coefficient(static_cast<int>(blocks.size())));
        std::vector<const DiscreteMeasure*> parts;
        parts.reserve(blocks.size());
        for (const auto& block : blocks) {
            std::uint32_t mask = 0;
            for (const int i : block) mask |= 1u << i;
            parts.push_back(&subset_marginal(mask));
        }
        const auto recurse = [&](auto&& self, std::size_t b, double w) -> void {
            if (b == blocks.size()) {
                acc[detail::flatten_point(P.shape, scratch)] += coeff * w;
                return;
            }
            for (const auto& [pt, pw] : parts[b]->atoms) {
                for (std::size_t idx = 0; idx < blocks[b].size(); ++idx)
                    scratch[static_cast<std::size_t>(blocks[b][idx])] = pt[idx];
                self(self, b + 1, w * pw);
            }
        };
        recurse(recurse, 0, 1.0);
    }
    return detail::from_flat(P.shape, acc);
}

/// Product witness: given signed single-variable factors mu_1, ..., mu_n of
/// which at least n+1-k are mean-zero, produces a probability P and a scale
/// M >= 0 with
///   Lambda_k^n[P] = M * (-1)^n * (mu_1 x ... x mu_n).
/// When at least k factors are mean-zero (and not n = k = 1) the witness is
/// nonvacuous: the k "special" mean-zero factors are Jordan-split
/// mu_i = b_i (S_i^1 - S_i^2), the rest Hahn-Jordan
/// mu_i = c_i^1 R_i^1 - c_i^2 R_i^2, and P couples even to even / odd to odd
/// sign-choice parities:
///   P = (1/D) [ (sum_{|alpha| even} S_alpha) x (sum_{|beta| even} c_beta R_beta)
///             + (sum_{|alpha| odd}  S_alpha) x (sum_{|beta| odd}  c_beta R_beta) ],
/// D = 2^{k-1} sum_beta c_beta, M = 1 / (2 D prod_i b_i).  Otherwise the
/// vacuous witness M = 0, P = tensor of normalized |mu_i| still satisfies the
/// identity, since a full product has zero interaction remainder.
[[nodiscard]] inline std::pair<DiscreteMeasure, double>
witness_from_factors(const std::vector<DiscreteMeasure>& factors, int k) {
    const int n = static_cast<int>(factors.size());
    detail::check_order(k, n);
    SpaceShape shape;
    for (const auto& f : factors) {
        if (f.shape.vars() != 1)
            throw shape_error("witness_from_factors: each factor must live on one variable");
        if (f.atoms.empty())
            throw witness_error("witness_from_factors: factor without mass");
        shape.dims.push_back(f.shape.dims[0]);
    }

    std::vector<int> zero_idx;
    for (int i = 0; i < n; ++i) {
        const auto& f = factors[static_cast<std::size_t>(i)];
        if (std::abs(total_mass(f)) <= 1e-12 * std::max(1.0, total_variation(f)))
            zero_idx.push_back(i);
    }
    if (static_cast<int>(zero_idx.size()) < n + 1 - k)
        throw witness_error("witness_from_factors: need at least n + 1 - k mean-zero factors");

    if (static_cast<int>(zero_idx.size()) < k || (n == 1 && k == 1)) {
        // No nonvacuous witness from this construction; M = 0 keeps the
        // identity because a pure product has no order-k remainder.
        std::vector<DiscreteMeasure> absolute;
        absolute.reserve(factors.size());
        for (const auto& f : factors) {
            auto [pos, neg] = hahn_jordan(f);
            absolute.push_back(scale(1.0 / total_variation(f), combine(1.0, pos, 1.0, neg)));
        }
        return {product(absolute), 0.0};
    }

    const std::vector<int> specials(zero_idx.begin(), zero_idx.begin() + k);
    std::vector<int> others;
    {
        std::vector<bool> is_special(static_cast<std::size_t>(n), false);
        for (const int i : specials) is_special[static_cast<std::size_t>(i)] = true;
        for (int i = 0; i < n; ++i)
            if (!is_special[static_cast<std::size_t>(i)]) others.push_back(i);
    }

    // Per-factor signed splits, normalized as in the construction.
    struct SignedSplit {
        std::vector<std::pair<Block, double>> one, two; // S^1/S^2 or R^1/R^2
        double cone = 0.0, ctwo = 0.0;                  // masses before normalizing
    };
    const auto split_factor = [](const DiscreteMeasure& f) {
        SignedSplit s;
        for (const auto& [pt, w] : f.atoms)
            if (w > 0.0) s.cone += w; else s.ctwo -= w;
        for (const auto& [pt, w] : f.atoms) {
            if (w > 0.0) s.one.emplace_back(pt[0], w);
            else s.two.emplace_back(pt[0], -w);
        }
        return s;
    };

    std::vector<SignedSplit> spec_split, other_split;
    double B = 1.0;
    for (const int i : specials) {
        auto s = split_factor(factors[static_cast<std::size_t>(i)]);
        if (!(s.cone > 0.0) || !(s.ctwo > 0.0))
            throw witness_error("witness_from_factors: mean-zero factor needs both signs");
        const double b = s.cone; // Jordan scale; mean-zero makes both sides b
        for (auto& [pt, w] : s.one) w /= b;
        for (auto& [pt, w] : s.two) w /= b;
        B *= b;
        spec_split.push_back(std::move(s));
    }
    for (const int i : others) {
        auto s = split_factor(factors[static_cast<std::size_t>(i)]);
        for (auto& [pt, w] : s.one) w /= s.cone;
        for (auto& [pt, w] : s.two) w /= s.ctwo;
        other_split.push_back(std::move(s));
    }

    // Parity-resolved sums over sign choices, kept on the sub-products of
    // special / other variables (flat keys within each group).
    SpaceShape spec_shape, other_shape;
    for (const int i : specials) spec_shape.dims.push_back(shape.dims[static_cast<std::size_t>(i)]);
    for (const int i : others) other_shape.dims.push_back(shape.dims[static_cast<std::size_t>(i)]);

    using GroupMap = std::map<std::vector<double>, double>;
    const auto cross_choice = [](const std::vector<const std::vector<std::pair<Block, double>>*>& parts,
                                 double coeff, GroupMap& into) {
        std::vector<double> flat;
        const auto rec = [&](auto&& self, std::size_t at, double w) -> void {
            if (at == parts.size()) {
                into[flat] += coeff * w;
                return;
            }
            for (const auto& [blk, bw] : *parts[at]) {
                const std::size_t mark = flat.size();
                for (const double x : blk) flat.push_back(detail::canonical_coord(x));
                self(self, at + 1, w * bw);
                flat.resize(mark);
            }
        };
        rec(rec, 0, 1.0);
    };

    GroupMap s_even, s_odd;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        std::vector<const std::vector<std::pair<Block, double>>*> parts;
        parts.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            parts.push_back((mask >> i) & 1u ? &spec_split[static_cast<std::size_t>(i)].two
                                             : &spec_split[static_cast<std::size_t>(i)].one);
        const int ones = k - std::popcount(mask); // sign-1 choices
        cross_choice(parts, 1.0, ones % 2 == 0 ? s_even : s_odd);
    }

    GroupMap r_even, r_odd;
    double csum = 0.0;
    const int m = static_cast<int>(others.size());
    if (m == 0) {
        r_even[{}] = 1.0;
        csum = 1.0;
    } else {
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
            double cb = 1.0;
            std::vector<const std::vector<std::pair<Block, double>>*> parts;
            parts.reserve(static_cast<std::size_t>(m));
            bool alive = true;
            for (int i = 0; i < m; ++i) {
                const auto& s = other_split[static_cast<std::size_t>(i)];
                const bool second = (mask >> i) & 1u;
                const double c = second ? s.ctwo : s.cone;
                if (!(c > 0.0)) { alive = false; break; }
                cb *= c;
                parts.push_back(second ? &s.two : &s.one);
            }
            if (!alive) continue;
            csum += cb;
            const int ones = m - std::popcount(mask);
            cross_choice(parts, cb, ones % 2 == 0 ? r_even : r_odd);
        }
    }
    assert(csum > 0.0);
    const double D = std::ldexp(csum, k - 1); // 2^{k-1} * sum_beta c_beta

    detail::FlatMap acc;
    const auto add_cross = [&](const GroupMap& sa, const GroupMap& rb) {
        ProductPoint joined(static_cast<std::size_t>(n));
        for (const auto& [sflat, sw] : sa)
            for (const auto& [rflat, rw] : rb) {
                const ProductPoint spt = detail::unflatten_point(spec_shape, sflat);
                const ProductPoint rpt = detail::unflatten_point(other_shape, rflat);
                for (std::size_t a = 0; a < specials.size(); ++a)
                    joined[static_cast<std::size_t>(specials[a])] = spt[a];
                for (std::size_t a = 0; a < others.size(); ++a)
                    joined[static_cast<std::size_t>(others[a])] = rpt[a];
                acc[detail::flatten_point(shape, joined)] += sw * rw / D;
            }
    };
    add_cross(s_even, r_even);
    add_cross(s_odd, r_odd);

    const double M = 1.0 / (2.0 * B * D);
    return {detail::from_flat(shape, acc), M};
}

} // namespace ikern
