#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ikern/errors.hpp"

namespace ikern {

/// Exact binomial coefficient C(n, k) from a Pascal-triangle table.
/// Supported for 0 <= n <= 62, where every entry fits in int64 exactly
/// (C(62,31) = 465428353255261088 < 2^63).  n outside that range throws;
/// k outside [0, n] is the usual empty convention 0.
[[nodiscard]] inline std::int64_t binom(int n, int k) {
    constexpr int max_n = 62;
    if (n < 0 || n > max_n)
        throw arity_error("binom: n must be in [0, 62] for exact int64 values");
    if (k < 0 || k > n) return 0;
    static const auto table = [] {
        std::vector<std::vector<std::int64_t>> t(max_n + 1);
        for (int i = 0; i <= max_n; ++i) {
            t[i].assign(i + 1, 1);
            for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
        }
        return t;
    }();
    return table[n][k];
}

namespace detail {

/// Signed coefficient (-1)^{k-j} C(n-j-1, n-k) of the order-j correction
/// layer shared by the H/E polynomials, the border correction, and the
/// interaction remainder; the layers sum against C(n, j) to -1, which is
/// what kills every marginal below order k.
[[nodiscard]] inline double layer_coefficient(int n, int k, int j) {
    const double c = static_cast<double>(binom(n - j - 1, n - k));
    return ((k - j) % 2 == 0) ? c : -c;
}

} // namespace detail

/// All elementary symmetric polynomials p_0^n(r), ..., p_m^n(r) for
/// m = min(up_to, n), via the one-row recurrence
///   p_j(r_1..r_{i+1}) = p_j(r_1..r_i) + r_{i+1} p_{j-1}(r_1..r_i),
/// O(n * m) with no cancellation-prone rearrangement.
[[nodiscard]] inline std::vector<double> elem_sym_poly_prefix(const std::vector<double>& r, int up_to) {
    const int n = static_cast<int>(r.size());
    const int m = up_to < n ? up_to : n;
    assert(m >= 0);
    std::vector<double> p(static_cast<std::size_t>(m) + 1, 0.0);
    p[0] = 1.0;
    int filled = 0; // highest index that can be nonzero so far
    for (const double x : r) {
        filled = filled < m ? filled + 1 : m;
        for (int j = filled; j >= 1; --j) p[j] += x * p[j - 1];
    }
    return p;
}

/// Elementary symmetric polynomial p_k^n(r) = sum_{i1<...<ik} r_{i1}...r_{ik},
/// with p_0^n = 1.  k outside [0, n] is an arity error.
[[nodiscard]] inline double elem_sym_poly(const std::vector<double>& r, int k) {
    const int n = static_cast<int>(r.size());
    if (k < 0 || k > n)
        throw arity_error("elem_sym_poly: order k must be in [0, n]");
    return elem_sym_poly_prefix(r, k)[static_cast<std::size_t>(k)];
}

/// H_k^n(r) = p_n^n(r) + sum_{j=0}^{k-1} (-1)^{k-j} C(n-j-1, n-k) p_j^n(r),
/// the order-k boundary-corrected combination; H_k^n(1,...,1) = 0 and
/// (-1)^n H_n^n(r) = p_n^n(1-r).  Requires 1 <= k <= n.
[[nodiscard]] inline double h_poly(const std::vector<double>& r, int k) {
    const int n = static_cast<int>(r.size());
    if (n < 1) throw arity_error("h_poly: need at least one variable");
    if (k < 1 || k > n)
        throw arity_error("h_poly: order k must be in [1, n]");
    const auto p = elem_sym_poly_prefix(r, n);
    double acc = p[static_cast<std::size_t>(n)];
    for (int j = 0; j < k; ++j)
        acc += detail::layer_coefficient(n, k, j) * p[static_cast<std::size_t>(j)];
    return acc;
}

/// E_k^n(s) = H_k^n(e^{-s_1}, ..., e^{-s_n}) for s in [0, inf)^n.
/// Vanishes whenever fewer than k entries of s are nonzero, and carries the
/// sign (-1)^k E_k^n >= 0; on the diagonal case n = k it factors as
/// E_k^k(s) = prod_i (e^{-s_i} - 1).  Negative entries are a domain error.
[[nodiscard]] inline double e_kernel_core(const std::vector<double>& s, int k) {
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] >= 0.0))
            throw domain_error("e_kernel_core: entries must be >= 0");
        r[i] = std::exp(-s[i]);
    }
    return h_poly(r, k);
}

/// Shifted ratio p_k^n(r + 1) / p_k^n(r), the order-k mixing weight attached
/// to a radial atom r.  Finite and >= 1 away from the boundary stratum; fewer
/// than k + 1 strictly positive entries make the atom degenerate.
[[nodiscard]] inline double shifted_ratio(const std::vector<double>& r, int k) {
    const int n = static_cast<int>(r.size());
    if (k < 0 || k > n)
        throw arity_error("shifted_ratio: order k must be in [0, n]");
    int positive = 0;
    for (const double x : r) {
        if (!(x >= 0.0))
            throw domain_error("shifted_ratio: entries must be >= 0");
        if (x > 0.0) ++positive;
    }
    if (positive < k + 1)
        throw degenerate_support_error("shifted_ratio: need at least k + 1 strictly positive entries");
    std::vector<double> shifted(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) shifted[i] = r[i] + 1.0;
    const double num = elem_sym_poly(shifted, k);
    const double den = elem_sym_poly(r, k);
    assert(den > 0.0);
    return num / den;
}

} // namespace ikern
