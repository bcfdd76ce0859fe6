#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "ikern/errors.hpp"
#include "ikern/kernels.hpp"

namespace ikern {

using ordered_json = nlohmann::ordered_json;

namespace detail {

[[nodiscard]] inline const ordered_json& need(const ordered_json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key))
        throw input_error(std::string("kernel json: ") + where + " needs key \"" + key + "\"");
    return j.at(key);
}

[[nodiscard]] inline double need_number(const ordered_json& j, const char* key, const char* where) {
    const auto& v = need(j, key, where);
    if (!v.is_number())
        throw input_error(std::string("kernel json: ") + where + " key \"" + key + "\" must be a number");
    return v.get<double>();
}

[[nodiscard]] inline int need_int(const ordered_json& j, const char* key, const char* where) {
    const auto& v = need(j, key, where);
    if (!v.is_number_integer())
        throw input_error(std::string("kernel json: ") + where + " key \"" + key + "\" must be an integer");
    return v.get<int>();
}

[[nodiscard]] inline Bernstein1D bernstein_from_json(const ordered_json& j) {
    const auto& type = need(j, "type", "bernstein factor");
    if (!type.is_string())
        throw input_error("kernel json: bernstein factor \"type\" must be a string");
    const std::string name = type.get<std::string>();
    if (name == "exp") return Bernstein1D::exponential(need_number(j, "rate", "exp factor"));
    if (name == "power") return Bernstein1D::power(need_number(j, "a", "power factor"));
    if (name == "logshift") return Bernstein1D::logshift(need_number(j, "c", "logshift factor"));
    throw input_error("kernel json: unknown bernstein factor type \"" + name + "\"");
}

[[nodiscard]] inline ordered_json bernstein_to_json(const Bernstein1D& f) {
    ordered_json j;
    switch (f.family) {
        case Bernstein1D::Family::exp:
            j["type"] = "exp";
            j["rate"] = f.param;
            break;
        case Bernstein1D::Family::power:
            j["type"] = "power";
            j["a"] = f.param;
            break;
        case Bernstein1D::Family::logshift:
            j["type"] = "logshift";
            j["c"] = f.param;
            break;
    }
    return j;
}

[[nodiscard]] inline CMFamily cm_from_json(const ordered_json& j) {
    const auto& type = need(j, "type", "psi");
    if (!type.is_string())
        throw input_error("kernel json: psi \"type\" must be a string");
    const std::string name = type.get<std::string>();
    if (name == "power") return CMFamily::power_cm(need_int(j, "ell", "psi"), need_number(j, "a", "psi"));
    if (name == "log") return CMFamily::log_cm(need_int(j, "ell", "psi"));
    if (name == "shiftpower")
        return CMFamily::shiftpower_cm(need_int(j, "ell", "psi"), need_number(j, "c", "psi"),
                                       need_number(j, "a", "psi"));
    if (name == "exp") return CMFamily::exp_cm(need_number(j, "rate", "psi"));
    throw input_error("kernel json: unknown psi type \"" + name + "\"");
}

[[nodiscard]] inline ordered_json cm_to_json(const CMFamily& f) {
    ordered_json j;
    switch (f.kind) {
        case CMFamily::Kind::power:
            j["type"] = "power";
            j["ell"] = f.ell;
            j["a"] = f.a;
            break;
        case CMFamily::Kind::log:
            j["type"] = "log";
            j["ell"] = f.ell;
            break;
        case CMFamily::Kind::shiftpower:
            j["type"] = "shiftpower";
            j["ell"] = f.ell;
            j["c"] = f.c;
            j["a"] = f.a;
            break;
        case CMFamily::Kind::exp:
            j["type"] = "exp";
            j["rate"] = f.rate;
            break;
    }
    return j;
}

} // namespace detail

/// Parses a kernel specification.  Schema violations raise input errors with
/// a pointer to the offending element; semantic violations raise the same
/// typed errors as direct construction.
[[nodiscard]] inline KernelSpec kernel_from_json(const ordered_json& j) {
    const auto& family = detail::need(j, "family", "spec");
    if (!family.is_string())
        throw input_error("kernel json: \"family\" must be a string");
    const std::string name = family.get<std::string>();

    KernelSpec spec;
    if (name == "product") {
        const auto& parts = detail::need(j, "parts", "product spec");
        if (!parts.is_array() || parts.empty())
            throw input_error("kernel json: \"parts\" must be a non-empty array");
        ProductBernstein p;
        for (const auto& part : parts) p.parts.push_back(detail::bernstein_from_json(part));
        spec = std::move(p);
    } else if (name == "orderk") {
        OrderKKernel o;
        o.n = detail::need_int(j, "n", "orderk spec");
        o.k = detail::need_int(j, "k", "orderk spec");
        const auto& eta = detail::need(j, "eta", "orderk spec");
        if (!eta.is_array())
            throw input_error("kernel json: \"eta\" must be an array");
        for (const auto& atom : eta) {
            const auto& r = detail::need(atom, "r", "eta atom");
            if (!r.is_array())
                throw input_error("kernel json: eta atom \"r\" must be an array");
            EtaAtom e;
            for (const auto& x : r) {
                if (!x.is_number())
                    throw input_error("kernel json: eta atom entries must be numbers");
                e.r.push_back(x.get<double>());
            }
            e.w = detail::need_number(atom, "w", "eta atom");
            o.eta.push_back(std::move(e));
        }
        if (j.contains("cross")) {
            const auto& cross = j.at("cross");
            if (!cross.is_array())
                throw input_error("kernel json: \"cross\" must be an array");
            for (const auto& term : cross) {
                const auto& vars = detail::need(term, "vars", "cross term");
                if (!vars.is_array())
                    throw input_error("kernel json: cross term \"vars\" must be an array");
                CrossTerm t;
                for (const auto& v : vars) {
                    if (!v.is_number_integer())
                        throw input_error("kernel json: cross term variables must be integers");
                    t.vars.push_back(v.get<int>());
                }
                const auto& parts = detail::need(term, "parts", "cross term");
                if (!parts.is_array())
                    throw input_error("kernel json: cross term \"parts\" must be an array");
                for (const auto& part : parts) t.parts.push_back(detail::bernstein_from_json(part));
                o.cross.push_back(std::move(t));
            }
        }
        spec = std::move(o);
    } else if (name == "sumcm") {
        SumCMKernel s;
        s.n = detail::need_int(j, "n", "sumcm spec");
        s.ell = detail::need_int(j, "ell", "sumcm spec");
        s.psi = detail::cm_from_json(detail::need(j, "psi", "sumcm spec"));
        spec = std::move(s);
    } else {
        throw input_error("kernel json: unknown family \"" + name + "\"");
    }
    validate_kernel(spec);
    return spec;
}

/// Canonical resolved form; parse(serialize(spec)) round-trips.
[[nodiscard]] inline ordered_json kernel_to_json(const KernelSpec& spec) {
    ordered_json j;
    if (const auto* p = std::get_if<ProductBernstein>(&spec)) {
        j["family"] = "product";
        auto& parts = j["parts"] = ordered_json::array();
        for (const auto& part : p->parts) parts.push_back(detail::bernstein_to_json(part));
        return j;
    }
    if (const auto* o = std::get_if<OrderKKernel>(&spec)) {
        j["family"] = "orderk";
        j["n"] = o->n;
        j["k"] = o->k;
        auto& eta = j["eta"] = ordered_json::array();
        for (const auto& atom : o->eta) {
            ordered_json e;
            e["r"] = atom.r;
            e["w"] = atom.w;
            eta.push_back(std::move(e));
        }
        if (!o->cross.empty()) {
            auto& cross = j["cross"] = ordered_json::array();
            for (const auto& term : o->cross) {
                ordered_json t;
                t["vars"] = term.vars;
                auto& parts = t["parts"] = ordered_json::array();
                for (const auto& part : term.parts) parts.push_back(detail::bernstein_to_json(part));
                cross.push_back(std::move(t));
            }
        }
        return j;
    }
    const auto& s = std::get<SumCMKernel>(spec);
    j["family"] = "sumcm";
    j["n"] = s.n;
    j["ell"] = s.ell;
    j["psi"] = detail::cm_to_json(s.psi);
    return j;
}

} // namespace ikern
