#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/kernel_json.hpp"
#include "ikern/kernels.hpp"
#include "ikern/measure.hpp"
#include "ikern/partitions.hpp"
#include "ikern/statistics.hpp"
#include "ikern/verify.hpp"
#include "ikern/version.hpp"

namespace ikern::cli {

namespace detail {

/// CSV of flattened coordinates: one row per observation, one column per
/// block coordinate, blocks laid out in --groups order.  Line numbers in
/// diagnostics are 1-based and count the header line.
[[nodiscard]] inline std::vector<ProductPoint> read_csv(const std::string& path,
                                                        const std::vector<int>& groups, bool header) {
    int total = 0;
    for (const int g : groups) {
        if (g < 1) throw input_error("groups must be positive integers");
        total += g;
    }
    if (groups.empty()) throw input_error("groups must be nonempty");

    std::ifstream in(path);
    if (!in) throw input_error("cannot open input file: " + path);

    std::vector<ProductPoint> rows;
    std::string line;
    int lineno = 0;
    bool skipped_header = !header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string cell =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\t')) ++used;
                if (used != cell.size()) throw std::invalid_argument("trailing characters");
                fields.push_back(v);
            } catch (const std::exception&) {
                throw input_error("line " + std::to_string(lineno) + ": field " +
                                  std::to_string(fields.size() + 1) + ": invalid number '" + cell + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (static_cast<int>(fields.size()) != total)
            throw input_error("line " + std::to_string(lineno) + ": expected " + std::to_string(total) +
                              " fields, got " + std::to_string(fields.size()));
        ProductPoint pt;
        pt.reserve(groups.size());
        std::size_t at = 0;
        for (const int g : groups) {
            pt.emplace_back(fields.begin() + static_cast<std::ptrdiff_t>(at),
                            fields.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(g)));
            at += static_cast<std::size_t>(g);
        }
        rows.push_back(std::move(pt));
    }
    if (rows.empty()) throw input_error("input contains no data rows");
    return rows;
}

[[nodiscard]] inline KernelSpec load_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open kernel file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error(std::string("kernel file: ") + e.what());
    }
    return kernel_from_json(j);
}

inline void emit(const ordered_json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw input_error("cannot open output file: " + out_path);
    out << text;
}

[[nodiscard]] inline ordered_json report_to_json(const VerifyReport& r) {
    ordered_json j;
    j["name"] = r.name;
    j["trials"] = r.trials;
    j["worst_violation"] = r.worst_violation;
    j["tolerance"] = r.tolerance;
    j["passed"] = r.passed;
    j["seed"] = r.seed;
    return j;
}

/// Distinct one-variable Bernstein factors of a kernel, for the CND checks:
/// explicit product and cross-term parts, plus the exponential factors the
/// radial atoms are mixed from.  The additive CM family has none.
[[nodiscard]] inline std::vector<std::pair<std::string, Bernstein1D>> cnd_factors(
    const KernelSpec& spec) {
    std::vector<std::pair<std::string, Bernstein1D>> out;
    const auto label = [](const Bernstein1D& b) {
        std::ostringstream os;
        switch (b.family) {
            case Bernstein1D::Family::exp: os << "exp(" << b.param << ")"; break;
            case Bernstein1D::Family::power: os << "power(" << b.param << ")"; break;
            case Bernstein1D::Family::logshift: os << "logshift(" << b.param << ")"; break;
        }
        return os.str();
    };
    const auto add = [&](const Bernstein1D& b) {
        if (out.size() >= 16) return;
        const std::string name = label(b);
        for (const auto& [seen, f] : out)
            if (seen == name) return;
        out.emplace_back(name, b);
    };
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) {
        for (const auto& b : p->parts) add(b);
    } else if (const auto* o = std::get_if<OrderKKernel>(&spec)) {
        for (const auto& c : o->cross)
            for (const auto& b : c.parts) add(b);
        for (const auto& atom : o->eta)
            for (const double r : atom.r)
                if (r > 0.0) add(Bernstein1D::exponential(r));
    }
    return out;
}

} // namespace detail

/// CLI entry point; returns the process exit code (0 success, 2 invalid
/// input or configuration, 3 failed verification).
[[nodiscard]] inline int run(int argc, const char* const* argv) {
    CLI::App app{"interaction measures, order-k kernels, and interaction energy statistics"};
    app.require_subcommand(1);
    int exit_code = 0;

    // ---- interaction ----
    auto* c_int = app.add_subcommand("interaction", "interaction statistic of a CSV sample");
    struct {
        std::string input, kernel, mode = "lancaster", out;
        std::vector<int> groups;
        int order = 0;
        std::optional<int> permutations;
        std::uint64_t seed = 0;
        bool no_header = false;
    } ia;
    c_int->add_option("--input", ia.input, "CSV file of observations")->required();
    c_int->add_option("--groups", ia.groups, "comma-separated block dimensions")
        ->required()
        ->delimiter(',');
    c_int->add_option("--order", ia.order, "interaction order k")->required();
    c_int->add_option("--mode", ia.mode, "lancaster or streitberg");
    c_int->add_option("--kernel", ia.kernel, "kernel spec JSON file")->required();
    c_int->add_option("--permutations", ia.permutations, "number of permutation replicates");
    c_int->add_option("--seed", ia.seed, "permutation RNG seed");
    c_int->add_option("--out", ia.out, "write the JSON report here instead of stdout");
    c_int->add_flag("--no-header", ia.no_header, "CSV has no header line");
    c_int->callback([&] {
        StatMode mode;
        if (ia.mode == "lancaster") mode = StatMode::lancaster;
        else if (ia.mode == "streitberg") mode = StatMode::streitberg;
        else throw input_error("mode must be 'lancaster' or 'streitberg'");
        const KernelSpec spec = detail::load_kernel(ia.kernel);
        const auto sample = detail::read_csv(ia.input, ia.groups, !ia.no_header);
        SpaceShape shape;
        shape.dims = ia.groups;

        ordered_json report;
        if (ia.permutations) {
            const PermutationResult res =
                permutation_pvalue(sample, shape, ia.order, spec, mode, *ia.permutations, ia.seed);
            report["statistic"] = res.statistic;
            report["p_value"] = res.p_value;
        } else {
            report["statistic"] = interaction_statistic(sample, shape, ia.order, spec, mode);
            report["p_value"] = nullptr;
        }
        report["order"] = ia.order;
        report["mode"] = ia.mode;
        report["kernel"] = kernel_to_json(spec);
        if (ia.permutations) report["seed"] = ia.seed;
        else report["seed"] = nullptr;
        report["version"] = version_string;
        detail::emit(report, ia.out);
    });

    // ---- partitions ----
    auto* c_part = app.add_subcommand("partitions", "set partitions of {0..n-1} as JSON lines");
    struct {
        int n = 0;
    } pa;
    c_part->add_option("--n", pa.n, "ground-set size")->required();
    c_part->callback([&] {
        const auto parts = enumerate_partitions(pa.n);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            ordered_json j;
            j["index"] = i;
            j["rgs"] = parts[i];
            j["blocks"] = rgs_blocks(parts[i]);
            std::cout << j.dump() << "\n";
        }
    });

    // ---- verify-kernel ----
    auto* c_ver = app.add_subcommand("verify-kernel", "numerical positive-definiteness checks");
    struct {
        std::string kernel;
        int order = 0, trials = 200, dim = 0;
        std::uint64_t seed = 0;
    } ve;
    c_ver->add_option("--kernel", ve.kernel, "kernel spec JSON file")->required();
    c_ver->add_option("--order", ve.order, "interaction order to test at")->required();
    c_ver->add_option("--trials", ve.trials, "random trials per check");
    c_ver->add_option("--seed", ve.seed, "RNG seed");
    c_ver->add_option("--dim", ve.dim, "force this block dimension (0 = mixed)");
    c_ver->callback([&] {
        const KernelSpec spec = detail::load_kernel(ve.kernel);
        std::vector<VerifyReport> reports;
        reports.push_back(pdi_random_check(spec, ve.order, ve.trials, ve.seed, 1e-9, ve.dim));
        for (auto& r : inequality_suite(ve.trials, ve.seed)) reports.push_back(std::move(r));
        for (const auto& [name, factor] : detail::cnd_factors(spec)) {
            VerifyReport r = cnd_check([factor](double d) { return factor(d); },
                                       std::max(1, ve.trials / 10), ve.seed);
            r.name = "cnd:" + name;
            reports.push_back(std::move(r));
        }
        ordered_json out;
        out["kernel"] = kernel_to_json(spec);
        out["order"] = ve.order;
        out["trials"] = ve.trials;
        out["seed"] = ve.seed;
        bool all = true;
        out["reports"] = ordered_json::array();
        for (const auto& r : reports) {
            all = all && r.passed;
            out["reports"].push_back(detail::report_to_json(r));
        }
        out["passed"] = all;
        detail::emit(out, "");
        if (!all) exit_code = 3;
    });

    // ---- frechet ----
    auto* c_fre = app.add_subcommand("frechet", "Frechet alternating-sum identity check");
    struct {
        int ell = 0;
        std::vector<double> t;
    } fr;
    c_fre->add_option("--ell", fr.ell, "number of variables")->required();
    c_fre->add_option("--t", fr.t, "comma-separated positive reals")->required()->delimiter(',');
    c_fre->callback([&] {
        if (static_cast<int>(fr.t.size()) != fr.ell)
            throw input_error("--t must list exactly ell values");
        ordered_json out;
        out["ell"] = fr.ell;
        out["t"] = fr.t;
        out["reports"] = ordered_json::array();
        bool all = true;
        for (int k = 0; k <= fr.ell; ++k) {
            const VerifyReport r = frechet_check(fr.ell, fr.t, k);
            all = all && r.passed;
            ordered_json j;
            j["k"] = k;
            j["worst_violation"] = r.worst_violation;
            j["tolerance"] = r.tolerance;
            j["passed"] = r.passed;
            out["reports"].push_back(std::move(j));
        }
        out["passed"] = all;
        detail::emit(out, "");
        if (!all) exit_code = 3;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}

} // namespace ikern::cli
