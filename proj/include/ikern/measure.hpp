#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ikern/errors.hpp"

namespace ikern {

/// One variable's coordinates: a point in R^{d_i}.
using Block = std::vector<double>;

/// A point of the product space X_1 x ... x X_n, one block per variable.
using ProductPoint = std::vector<Block>;

/// Shape of a product space: dims[i] is the coordinate width of variable i.
struct SpaceShape {
    std::vector<int> dims;

    [[nodiscard]] int vars() const { return static_cast<int>(dims.size()); }
    bool operator==(const SpaceShape&) const = default;
};

/// Finitely supported signed measure on a product space.  Always held in
/// canonical form: atoms merged on bitwise-identical points (after -0.0 is
/// folded to +0.0), exact-zero weights dropped, support sorted by flattened
/// coordinates, so equal measures compare equal and iteration order is
/// deterministic.
struct DiscreteMeasure {
    SpaceShape shape;
    std::vector<std::pair<ProductPoint, double>> atoms;
};

namespace detail {

[[nodiscard]] inline double canonical_coord(double x) {
    return x == 0.0 ? 0.0 : x; // folds -0.0 onto +0.0
}

[[nodiscard]] inline std::vector<double> flatten_point(const SpaceShape& shape, const ProductPoint& point) {
    if (static_cast<int>(point.size()) != shape.vars())
        throw shape_error("measure: point has wrong number of blocks");
    std::vector<double> flat;
    for (int i = 0; i < shape.vars(); ++i) {
        if (static_cast<int>(point[static_cast<std::size_t>(i)].size()) != shape.dims[static_cast<std::size_t>(i)])
            throw shape_error("measure: block width does not match shape");
        for (const double x : point[static_cast<std::size_t>(i)]) {
            if (!std::isfinite(x))
                throw domain_error("measure: coordinates must be finite");
            flat.push_back(canonical_coord(x));
        }
    }
    return flat;
}

[[nodiscard]] inline ProductPoint unflatten_point(const SpaceShape& shape, const std::vector<double>& flat) {
    ProductPoint point(static_cast<std::size_t>(shape.vars()));
    std::size_t at = 0;
    for (int i = 0; i < shape.vars(); ++i) {
        const auto w = static_cast<std::size_t>(shape.dims[static_cast<std::size_t>(i)]);
        point[static_cast<std::size_t>(i)].assign(flat.begin() + static_cast<std::ptrdiff_t>(at),
                                                  flat.begin() + static_cast<std::ptrdiff_t>(at + w));
        at += w;
    }
    assert(at == flat.size());
    return point;
}

using FlatMap = std::map<std::vector<double>, double>;

[[nodiscard]] inline DiscreteMeasure from_flat(SpaceShape shape, const FlatMap& acc) {
    DiscreteMeasure out;
    out.shape = std::move(shape);
    out.atoms.reserve(acc.size());
    for (const auto& [flat, w] : acc)
        if (w != 0.0) out.atoms.emplace_back(unflatten_point(out.shape, flat), w);
    return out;
}

} // namespace detail

/// Builds the canonical measure from raw (point, weight) pairs.  Duplicate
/// points are summed; exact-zero results disappear.  Shape violations are
/// shape errors; non-finite coordinates or weights are domain errors.
[[nodiscard]] inline DiscreteMeasure from_atoms(SpaceShape shape,
                                                const std::vector<std::pair<ProductPoint, double>>& atoms) {
    if (shape.dims.empty())
        throw shape_error("measure: need at least one variable");
    for (const int d : shape.dims)
        if (d < 1) throw shape_error("measure: every block width must be >= 1");
    detail::FlatMap acc;
    for (const auto& [point, weight] : atoms) {
        if (!std::isfinite(weight))
            throw domain_error("measure: weights must be finite");
        acc[detail::flatten_point(shape, point)] += weight;
    }
    return detail::from_flat(std::move(shape), acc);
}

[[nodiscard]] inline double total_mass(const DiscreteMeasure& mu) {
    double s = 0.0;
    for (const auto& [point, w] : mu.atoms) s += w;
    return s;
}

[[nodiscard]] inline double total_variation(const DiscreteMeasure& mu) {
    double s = 0.0;
    for (const auto& [point, w] : mu.atoms) s += std::abs(w);
    return s;
}

/// a * mu + b * nu on a common shape.
[[nodiscard]] inline DiscreteMeasure combine(double a, const DiscreteMeasure& mu,
                                             double b, const DiscreteMeasure& nu) {
    if (!(mu.shape == nu.shape))
        throw shape_error("combine: shapes differ");
    detail::FlatMap acc;
    for (const auto& [point, w] : mu.atoms) acc[detail::flatten_point(mu.shape, point)] += a * w;
    for (const auto& [point, w] : nu.atoms) acc[detail::flatten_point(nu.shape, point)] += b * w;
    return detail::from_flat(mu.shape, acc);
}

[[nodiscard]] inline DiscreteMeasure scale(double a, const DiscreteMeasure& mu) {
    detail::FlatMap acc;
    for (const auto& [point, w] : mu.atoms) acc[detail::flatten_point(mu.shape, point)] += a * w;
    return detail::from_flat(mu.shape, acc);
}

/// Marginal onto the variables in `keep` (result blocks appear in the order
/// given).  Empty, repeated, or out-of-range indices are index errors.
[[nodiscard]] inline DiscreteMeasure marginal(const DiscreteMeasure& mu, const std::vector<int>& keep) {
    if (keep.empty())
        throw index_error("marginal: keep set must be non-empty");
    std::vector<int> seen = keep;
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] < 0 || seen[i] >= mu.shape.vars())
            throw index_error("marginal: variable index out of range");
        if (i > 0 && seen[i] == seen[i - 1])
            throw index_error("marginal: repeated variable index");
    }
    SpaceShape sub;
    for (const int i : keep) sub.dims.push_back(mu.shape.dims[static_cast<std::size_t>(i)]);
    detail::FlatMap acc;
    for (const auto& [point, w] : mu.atoms) {
        ProductPoint part;
        part.reserve(keep.size());
        for (const int i : keep) part.push_back(point[static_cast<std::size_t>(i)]);
        acc[detail::flatten_point(sub, part)] += w;
    }
    return detail::from_flat(std::move(sub), acc);
}

/// Tensor product of finitely many measures; blocks concatenate in order.
/// An empty factor list is an arity error.
[[nodiscard]] inline DiscreteMeasure product(const std::vector<DiscreteMeasure>& factors) {
    if (factors.empty())
        throw arity_error("product: need at least one factor");
    SpaceShape shape;
    for (const auto& f : factors)
        shape.dims.insert(shape.dims.end(), f.shape.dims.begin(), f.shape.dims.end());
    std::vector<std::pair<ProductPoint, double>> cur;
    cur.emplace_back(ProductPoint{}, 1.0);
    for (const auto& f : factors) {
        std::vector<std::pair<ProductPoint, double>> next;
        next.reserve(cur.size() * f.atoms.size());
        for (const auto& [pt, w] : cur)
            for (const auto& [fpt, fw] : f.atoms) {
                ProductPoint joined = pt;
                joined.insert(joined.end(), fpt.begin(), fpt.end());
                next.emplace_back(std::move(joined), w * fw);
            }
        cur = std::move(next);
    }
    return from_atoms(std::move(shape), cur);
}

/// Membership test for M_k: every marginal onto fewer than k variables must
/// vanish (the empty marginal being the total mass).  Works atomwise with an
/// absolute tolerance; k = 0 imposes nothing.  Needs n <= 16 since the test
/// enumerates variable subsets.
[[nodiscard]] inline bool is_member_Mk(const DiscreteMeasure& mu, int k, double tol = 1e-12) {
    const int n = mu.shape.vars();
    if (n > 16)
        throw arity_error("is_member_Mk: supported up to 16 variables");
    if (k < 0)
        throw arity_error("is_member_Mk: k must be >= 0");
    if (k == 0) return true;
    if (std::abs(total_mass(mu)) > tol) return false;
    const int top = std::min(k - 1, n);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const int size = std::popcount(mask);
        if (size > top) continue;
        std::vector<int> keep;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) keep.push_back(i);
        const auto mg = marginal(mu, keep);
        for (const auto& [point, w] : mg.atoms)
            if (std::abs(w) > tol) return false;
    }
    return true;
}

/// Hahn-Jordan decomposition mu = pos - neg with pos, neg >= 0 mutually
/// singular (split by atom sign).
[[nodiscard]] inline std::pair<DiscreteMeasure, DiscreteMeasure> hahn_jordan(const DiscreteMeasure& mu) {
    std::vector<std::pair<ProductPoint, double>> pos, neg;
    for (const auto& [point, w] : mu.atoms) {
        if (w > 0.0) pos.emplace_back(point, w);
        else neg.emplace_back(point, -w);
    }
    return {from_atoms(mu.shape, pos), from_atoms(mu.shape, neg)};
}

} // namespace ikern
