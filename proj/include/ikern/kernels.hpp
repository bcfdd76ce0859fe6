#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/measure.hpp"
#include "ikern/symfun.hpp"

namespace ikern {

/// One-variable Bernstein function, vanishing at 0, increasing and concave:
///   exp(rate):   1 - e^{-rate t}
///   power(a):    t^a,             a in (0, 1]
///   logshift(c): log(1 + t / c), c > 0.
struct Bernstein1D {
    enum class Family { exp, power, logshift };

    Family family = Family::exp;
    double param = 1.0;

    [[nodiscard]] static Bernstein1D exponential(double rate) {
        if (!(rate > 0.0)) throw domain_error("Bernstein1D: rate must be > 0");
        return {Family::exp, rate};
    }
    [[nodiscard]] static Bernstein1D power(double a) {
        if (!(a > 0.0) || !(a <= 1.0)) throw domain_error("Bernstein1D: exponent must be in (0, 1]");
        return {Family::power, a};
    }
    [[nodiscard]] static Bernstein1D logshift(double c) {
        if (!(c > 0.0)) throw domain_error("Bernstein1D: shift must be > 0");
        return {Family::logshift, c};
    }

    [[nodiscard]] double operator()(double t) const {
        assert(t >= 0.0);
        switch (family) {
            case Family::exp: return -std::expm1(-param * t);
            case Family::power: return std::pow(t, param);
            case Family::logshift: return std::log1p(t / param);
        }
        return 0.0; // unreachable
    }
};

/// One-variable function that is completely monotone of some order ell
/// (derivative signs settle from order ell on).  Evaluation includes the
/// (-1)^ell front sign where the family carries one:
///   power(ell, a):           (-1)^ell t^a,             a in (ell-1, ell]
///   log(ell):                (-1)^ell t^{ell-1} log t, ell >= 2
///   shiftpower(ell, c, a):   (-1)^ell (c + t)^a,       c > 0, a in (ell-1, ell]
///   exp(rate):               e^{-rate t}               (order-free).
struct CMFamily {
    enum class Kind { power, log, shiftpower, exp };

    Kind kind = Kind::exp;
    int ell = 0; // 0 for the order-free exponential
    double a = 0.0;
    double c = 0.0;
    double rate = 1.0;

    [[nodiscard]] static CMFamily power_cm(int ell, double a) {
        if (ell < 1) throw arity_error("CMFamily: power order must be >= 1");
        if (!(a > ell - 1.0) || !(a <= static_cast<double>(ell)))
            throw domain_error("CMFamily: power exponent must be in (ell-1, ell]");
        CMFamily f;
        f.kind = Kind::power;
        f.ell = ell;
        f.a = a;
        return f;
    }
    [[nodiscard]] static CMFamily log_cm(int ell) {
        // ell = 1 would be plain log t, unbounded at 0+; not usable here.
        if (ell < 2) throw arity_error("CMFamily: log order must be >= 2");
        CMFamily f;
        f.kind = Kind::log;
        f.ell = ell;
        return f;
    }
    [[nodiscard]] static CMFamily shiftpower_cm(int ell, double c, double a) {
        if (ell < 1) throw arity_error("CMFamily: shiftpower order must be >= 1");
        if (!(c > 0.0)) throw domain_error("CMFamily: shift must be > 0");
        if (!(a > ell - 1.0) || !(a <= static_cast<double>(ell)))
            throw domain_error("CMFamily: shiftpower exponent must be in (ell-1, ell]");
        CMFamily f;
        f.kind = Kind::shiftpower;
        f.ell = ell;
        f.c = c;
        f.a = a;
        return f;
    }
    [[nodiscard]] static CMFamily exp_cm(double rate) {
        if (!(rate > 0.0)) throw domain_error("CMFamily: rate must be > 0");
        CMFamily f;
        f.kind = Kind::exp;
        f.rate = rate;
        return f;
    }

    /// True when the family pins a specific order (exp is compatible with
    /// every order).
    [[nodiscard]] bool has_order() const { return kind != Kind::exp; }

    [[nodiscard]] double operator()(double t) const {
        assert(t >= 0.0);
        const double sign = (ell % 2 == 0) ? 1.0 : -1.0;
        switch (kind) {
            case Kind::power: return sign * std::pow(t, a);
            case Kind::log: return t == 0.0 ? 0.0 : sign * std::pow(t, ell - 1.0) * std::log(t);
            case Kind::shiftpower: return sign * std::pow(c + t, a);
            case Kind::exp: return std::exp(-rate * t);
        }
        return 0.0; // unreachable
    }
};

/// Full product of one-variable Bernstein factors,
/// g(t) = prod_i parts[i](t_i); the diagonal order-n radial family.
struct ProductBernstein {
    std::vector<Bernstein1D> parts;
};

/// One radial atom of an order-k mixing measure.
struct EtaAtom {
    std::vector<double> r;
    double w = 1.0;
};

/// Optional k-variable additive piece psi^F(t_F) = prod_{i in F} parts(t_i).
struct CrossTerm {
    std::vector<int> vars; // strictly increasing, |vars| = k
    std::vector<Bernstein1D> parts;
};

///// Order-k radial kernel on n variables:
///   g(t) = sum_F psi^F(t_F)
///        + sum_j w_j (-1)^k E_k^n(r_j . t) p_k^n(r_j + 1) / p_k^n(r_j).
struct OrderKKernel {
    int n = 0;
    int k = 0;
    std::vector<EtaAtom> eta;
    std::vector<CrossTerm> cross;
};

/// Additive completely monotone kernel psi(t_1 + ... + t_n) of order ell,
/// always taken with its internal border correction (see border_correct), so
/// it vanishes on every stratum with fewer than ell positive coordinates.
struct SumCMKernel {
    int n = 0;
    int ell = 0;
    CMFamily psi;
};

using KernelSpec = std::variant<ProductBernstein, OrderKKernel, SumCMKernel>;

/// Number of variables the kernel consumes.
[[nodiscard]] inline int kernel_vars(const KernelSpec& spec) {
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) return static_cast<int>(p->parts.size());
    if (const auto* o = std::get_if<OrderKKernel>(&spec)) return o->n;
    return std::get<SumCMKernel>(spec).n;
}

/// Interaction order the kernel is built for (n for products, k for order-k,
/// ell for the additive CM family).
[[nodiscard]] inline int kernel_order(const KernelSpec& spec) {
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) return static_cast<int>(p->parts.size());
    if (const auto* o = std::get_if<OrderKKernel>(&spec)) return o->k;
    return std::get<SumCMKernel>(spec).ell;
}

/// Structural validation.  Construction sites (JSON parsing, tests) call
/// this once; evaluation assumes it has passed.
inline void validate_kernel(const KernelSpec& spec) {
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) {
        if (p->parts.empty())
            throw arity_error("kernel: product needs at least one factor");
        if (p->parts.size() > 16)
            throw arity_error("kernel: supported up to 16 variables");
        return;
    }
    if (const auto* o = std::get_if<OrderKKernel>(&spec)) {
        if (o->n < 1 || o->n > 16)
            throw arity_error("kernel: variable count must be in [1, 16]");
        if (o->k < 1 || o->k > o->n)
            throw arity_error("kernel: order k must be in [1, n]");
        for (const auto& atom : o->eta) {
            if (static_cast<int>(atom.r.size()) != o->n)
                throw shape_error("kernel: eta atom has wrong length");
            if (!(atom.w > 0.0))
                throw domain_error("kernel: eta weight must be > 0");
            int positive = 0;
            for (const double x : atom.r) {
                if (!(x >= 0.0)) throw domain_error("kernel: eta atom entries must be >= 0");
                if (x > 0.0) ++positive;
            }
            if (positive < o->k + 1)
                throw degenerate_support_error(
                    "kernel: eta atom needs at least k + 1 strictly positive entries");
        }
        std::vector<std::vector<int>> seen;
        for (const auto& term : o->cross) {
            if (static_cast<int>(term.vars.size()) != o->k)
                throw index_error("kernel: cross term must name exactly k variables");
            for (std::size_t i = 0; i < term.vars.size(); ++i) {
                if (term.vars[i] < 0 || term.vars[i] >= o->n)
                    throw index_error("kernel: cross term variable out of range");
                if (i > 0 && term.vars[i] <= term.vars[i - 1])
                    throw index_error("kernel: cross term variables must be strictly increasing");
            }
            if (term.parts.size() != term.vars.size())
                throw arity_error("kernel: cross term needs one factor per variable");
            for (const auto& other : seen)
                if (other == term.vars)
                    throw index_error("kernel: repeated cross term variable set");
            seen.push_back(term.vars);
        }
        return;
    }
    const auto& s = std::get<SumCMKernel>(spec);
    if (s.n < 1 || s.n > 16)
        throw arity_error("kernel: variable count must be in [1, 16]");
    if (s.ell < 1 || s.ell > s.n)
        throw arity_error("kernel: order ell must be in [1, n]");
    if (s.psi.has_order() && s.psi.ell != s.ell)
        throw arity_error("kernel: psi family order does not match ell");
}

/// Border correction of order k:
///   G(t) = g(t) + sum_{j=0}^{k-1} (-1)^{k-j} C(n-j-1, n-k)
///                 sum_{|F|=j} g(t_F),
/// where t_F keeps the coordinates in F and zeroes the rest.  G vanishes on
/// every point with fewer than k positive coordinates, and for k = n the sum
/// collapses to the alternating inclusion-exclusion over all subsets.
template <class G>
[[nodiscard]] inline double border_correct(G&& g, int k, const std::vector<double>& t) {
    const int n = static_cast<int>(t.size());
    if (n < 1 || n > 16)
        throw arity_error("border_correct: variable count must be in [1, 16]");
    if (k < 1 || k > n)
        throw arity_error("border_correct: order k must be in [1, n]");
    double acc = g(t);
    std::vector<double> masked(t.size());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const int j = std::popcount(mask);
        if (j > k - 1) continue;
        const double coeff = detail::layer_coefficient(n, k, j);
        for (int i = 0; i < n; ++i)
            masked[static_cast<std::size_t>(i)] = ((mask >> i) & 1u) ? t[static_cast<std::size_t>(i)] : 0.0;
        acc += coeff * g(masked);
    }
    return acc;
}

namespace detail {

/// Kernel evaluation without revalidating the spec or the point.
[[nodiscard]] inline double eval_kernel_unchecked(const KernelSpec& spec, const std::vector<double>& t) {
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) {
        double g = 1.0;
        for (std::size_t i = 0; i < p->parts.size(); ++i) g *= p->parts[i](t[i]);
        return g;
    }
    if (const auto* o = std::get_if<OrderKKernel>(&spec)) {
        double g = 0.0;
        for (const auto& term : o->cross) {
            double piece = 1.0;
            for (std::size_t i = 0; i < term.vars.size(); ++i)
                piece *= term.parts[i](t[static_cast<std::size_t>(term.vars[i])]);
            g += piece;
        }
        const double sign = (o->k % 2 == 0) ? 1.0 : -1.0;
        std::vector<double> rt(t.size());
        for (const auto& atom : o->eta) {
            for (std::size_t i = 0; i < t.size(); ++i) rt[i] = atom.r[i] * t[i];
            g += atom.w * sign * e_kernel_core(rt, o->k) * shifted_ratio(atom.r, o->k);
        }
        return g;
    }
    const auto& s = std::get<SumCMKernel>(spec);
    const auto raw = [&s](const std::vector<double>& u) {
        double total = 0.0;
        for (const double x : u) total += x;
        return s.psi(total);
    };
    return border_correct(raw, s.ell, t);
}

} // namespace detail

/// Evaluates the kernel at a coordinatewise-nonnegative point t (distances
/// between blocks, one entry per variable).
[[nodiscard]] inline double eval_kernel(const KernelSpec& spec, const std::vector<double>& t) {
    validate_kernel(spec);
    if (static_cast<int>(t.size()) != kernel_vars(spec))
        throw shape_error("eval_kernel: point length does not match kernel");
    for (const double x : t)
        if (!(x >= 0.0)) throw domain_error("eval_kernel: entries must be >= 0");
    return detail::eval_kernel_unchecked(spec, t);
}

/// Truncated exponential pair
///   omega_ell(s) = sum_{j=0}^{ell-1} (-s)^j / j!
///   e_ell(s)     = e^{-s} sum_{j=0}^{ell-1} s^j / j!.
[[nodiscard]] inline std::pair<double, double> truncated_exp_pair(int ell, double s) {
    if (ell < 1) throw arity_error("truncated_exp_pair: ell must be >= 1");
    if (!std::isfinite(s)) throw domain_error("truncated_exp_pair: s must be finite");
    double omega = 0.0, tail = 0.0, term = 1.0;
    for (int j = 0; j < ell; ++j) {
        omega += (j % 2 == 0) ? term : -term;
        tail += term;
        term *= s / (j + 1.0);
    }
    return {omega, std::exp(-s) * tail};
}

namespace detail {

/// Per-variable Euclidean distances between two product points.
[[nodiscard]] inline std::vector<double> distance_profile(const SpaceShape& shape,
                                                          const ProductPoint& x,
                                                          const ProductPoint& y) {
    std::vector<double> d(static_cast<std::size_t>(shape.vars()));
    for (int i = 0; i < shape.vars(); ++i) {
        const auto& xb = x[static_cast<std::size_t>(i)];
        const auto& yb = y[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (std::size_t c = 0; c < xb.size(); ++c) {
            const double diff = xb[c] - yb[c];
            s += diff * diff;
        }
        d[static_cast<std::size_t>(i)] = std::sqrt(s);
    }
    return d;
}

} // namespace detail

/// Symmetric Gram matrix K[a][b] = g(d_1(x_a, x_b), ..., d_n(x_a, x_b)) over
/// the given points, with per-variable Euclidean block distances.
[[nodiscard]] inline Eigen::MatrixXd gram(const KernelSpec& spec, const SpaceShape& shape,
                                          const std::vector<ProductPoint>& points) {
    validate_kernel(spec);
    if (shape.vars() != kernel_vars(spec))
        throw shape_error("gram: space shape does not match kernel");
    for (const auto& p : points) (void)detail::flatten_point(shape, p); // shape check
    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd K(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = a; b < m; ++b) {
            const double v = detail::eval_kernel_unchecked(
                spec, detail::distance_profile(shape, points[static_cast<std::size_t>(a)],
                                               points[static_cast<std::size_t>(b)]));
            K(a, b) = v;
            K(b, a) = v;
        }
    return K;
}

} // namespace ikern
