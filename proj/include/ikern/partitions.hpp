#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/measure.hpp"

namespace ikern {

/// All set partitions of {0, ..., n-1} as restricted growth strings in
/// lexicographic order: a[0] = 0 and a[i] <= 1 + max(a[0..i-1]).  The string
/// assigns each variable its block label.  Supported for 1 <= n <= 12
/// (Bell(12) = 4213597 partitions).
[[nodiscard]] inline std::vector<std::vector<int>> enumerate_partitions(int n) {
    if (n < 1 || n > 12)
        throw arity_error("enumerate_partitions: n must be in [1, 12]");
    std::vector<std::vector<int>> out;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::vector<int> m(static_cast<std::size_t>(n), 0); // m[i] = max(a[0..i-1])
    while (true) {
        out.push_back(a);
        for (int j = 1; j < n; ++j)
            m[static_cast<std::size_t>(j)] =
                std::max(m[static_cast<std::size_t>(j - 1)], a[static_cast<std::size_t>(j - 1)]);
        // rightmost position that can still grow: a[i] <= m[i] (< m[i] + 1)
        int i = n - 1;
        while (i > 0 && a[static_cast<std::size_t>(i)] > m[static_cast<std::size_t>(i)]) --i;
        if (i == 0) break;
        ++a[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) a[static_cast<std::size_t>(j)] = 0;
    }
    return out;
}

/// Blocks of a restricted growth string, label order (= order of first
/// appearance, so blocks are sorted by their smallest element).
[[nodiscard]] inline std::vector<std::vector<int>> rgs_blocks(const std::vector<int>& rgs) {
    int labels = 0;
    for (const int a : rgs) labels = std::max(labels, a + 1);
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(labels));
    for (std::size_t i = 0; i < rgs.size(); ++i)
        blocks[static_cast<std::size_t>(rgs[i])].push_back(static_cast<int>(i));
    return blocks;
}

/// Bell numbers via the Bell triangle; exact in int64 for 0 <= n <= 25
/// (Bell(25) = 4638590332229999353).
[[nodiscard]] inline std::int64_t bell(int n) {
    if (n < 0 || n > 25)
        throw arity_error("bell: n must be in [0, 25] for exact int64 values");
    std::vector<std::int64_t> row{1};
    for (int i = 0; i < n; ++i) {
        std::vector<std::int64_t> next;
        next.reserve(row.size() + 1);
        next.push_back(row.back());
        for (const std::int64_t x : row) next.push_back(next.back() + x);
        row = std::move(next);
    }
    return row.front();
}

/// Moebius-style partition weight (-1)^{m-1} (m-1)! for a partition with m
/// blocks; exact in int64 up to m = 20.
[[nodiscard]] inline std::int64_t streitberg_coefficient(int blocks) {
    if (blocks < 1 || blocks > 20)
        throw arity_error("streitberg_coefficient: block count must be in [1, 20]");
    std::int64_t f = 1;
    for (int i = 2; i < blocks; ++i) f *= i;
    return (blocks % 2 == 1) ? f : -f;
}

/// P_pi: the product of P's block marginals, reassembled on the original
/// variable order.  `blocks` must partition {0, ..., n-1}; P must be a
/// probability (total mass 1 within 1e-9).
[[nodiscard]] inline DiscreteMeasure partition_factor(const DiscreteMeasure& P,
                                                      const std::vector<std::vector<int>>& blocks) {
    const int n = P.shape.vars();
    std::vector<int> hit(static_cast<std::size_t>(n), 0);
    for (const auto& block : blocks) {
        if (block.empty())
            throw index_error("partition_factor: empty block");
        for (const int i : block) {
            if (i < 0 || i >= n)
                throw index_error("partition_factor: variable index out of range");
            ++hit[static_cast<std::size_t>(i)];
        }
    }
    for (const int h : hit)
        if (h != 1) throw index_error("partition_factor: blocks must cover every variable exactly once");
    if (std::abs(total_mass(P) - 1.0) > 1e-9)
        throw mass_error("partition_factor: measure must be a probability");

    std::vector<DiscreteMeasure> parts;
    parts.reserve(blocks.size());
    for (const auto& block : blocks) parts.push_back(marginal(P, block));

    std::vector<std::pair<ProductPoint, double>> atoms;
    ProductPoint scratch(static_cast<std::size_t>(n));
    const auto recurse = [&](auto&& self, std::size_t b, double w) -> void {
        if (b == blocks.size()) {
            atoms.emplace_back(scratch, w);
            return;
        }
        for (const auto& [pt, pw] : parts[b].atoms) {
            for (std::size_t idx = 0; idx < blocks[b].size(); ++idx)
                scratch[static_cast<std::size_t>(blocks[b][idx])] = pt[idx];
            self(self, b + 1, w * pw);
        }
    };
    recurse(recurse, 0, 1.0);
    return from_atoms(P.shape, atoms);
}

} // namespace ikern
