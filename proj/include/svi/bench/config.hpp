#pragma once

// Experiment configuration: a JSON document with a schema_version field.
//
// {
//   "schema_version": 1,
//   "problem": {"kind": "bandwidth" | "cournot" | "quadratic",
//               "settings": "default" | ["S1", "S4", ...] | [{...}, ...]},
//   "schemes": ["DASA", "HSA(0.1)", "MSR-DASA", "MCR-HSA(10)", ...],
//   "runs": 25, "iterations": 4000, "record_every": 10,
//   "base_seed": 1, "ci_level": 0.9, "output_dir": "results/bandwidth",
//   "reference": {"saa_samples": 10000, "smoothing_samples": 10000, "tol": 1e-9},
//   "projection": {"tol": 1e-10, "max_iters": 100000}
// }
//
// Unknown keys are rejected so that typos surface as validation errors.

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svi/bench/reference.hpp"
#include "svi/error.hpp"
#include "svi/problems/bandwidth.hpp"
#include "svi/problems/cournot.hpp"
#include "svi/projections.hpp"
#include "svi/smoothing.hpp"

namespace svi::bench {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class ProblemKind { Bandwidth, Cournot, Quadratic };

inline const char* to_string(ProblemKind k) noexcept {
    switch (k) {
        case ProblemKind::Bandwidth: return "bandwidth";
        case ProblemKind::Cournot: return "cournot";
        case ProblemKind::Quadratic: return "quadratic";
    }
    return "?";
}

enum class StepRule { DASA, ASA, HSA };

/// A scheme label such as "DASA", "HSA(0.1)", "MSR-DASA" or "MCR-HSA(10)".
struct SchemeSpec {
    std::string label;
    SmoothingKind smoothing = SmoothingKind::None;
    StepRule rule = StepRule::HSA;
    double theta = 1.0;  ///< HSA only
};

inline SchemeSpec parse_scheme(const std::string& label) {
    SchemeSpec s;
    s.label = label;
    std::string rest = label;
    if (rest.rfind("MSR-", 0) == 0) {
        s.smoothing = SmoothingKind::MSR;
        rest = rest.substr(4);
    } else if (rest.rfind("MCR-", 0) == 0) {
        s.smoothing = SmoothingKind::MCR;
        rest = rest.substr(4);
    }
    if (rest == "DASA") {
        s.rule = StepRule::DASA;
    } else if (rest == "ASA") {
        s.rule = StepRule::ASA;
    } else if (rest.rfind("HSA(", 0) == 0 && rest.size() > 5 && rest.back() == ')') {
        s.rule = StepRule::HSA;
        const std::string num = rest.substr(4, rest.size() - 5);
        std::size_t used = 0;
        try {
            s.theta = std::stod(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != num.size() || !(s.theta > 0.0) || !std::isfinite(s.theta))
            throw ValidationError("scheme '" + label + "': theta must be a positive number");
    } else {
        throw ValidationError("unknown scheme '" + label +
                              "' (expected [MSR-|MCR-]DASA, [MSR-|MCR-]ASA or [MSR-|MCR-]HSA(theta))");
    }
    return s;
}

/// Synthetic quadratic setting: dimension, instance seed, noise half-width,
/// kink slope and smoothing radius.
struct QuadraticSettings {
    std::string name = "Q1";
    std::size_t n = 4;
    std::uint64_t seed = 1;
    double noise = 1.0;
    double rho = 0.0;
    double eps = 0.1;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    ProblemKind kind = ProblemKind::Bandwidth;
    std::vector<problems::BandwidthSettings> bandwidth;
    std::vector<problems::CournotSettings> cournot;
    std::vector<QuadraticSettings> quadratic;
    std::vector<SchemeSpec> schemes;
    std::size_t runs = 25;
    std::size_t iterations = 4000;
    std::size_t record_every = 10;
    std::uint64_t base_seed = 1;
    double ci_level = 0.9;
    std::string output_dir = "results";
    ReferenceConfig reference;
    DykstraConfig projection;

    std::size_t num_settings() const {
        switch (kind) {
            case ProblemKind::Bandwidth: return bandwidth.size();
            case ProblemKind::Cournot: return cournot.size();
            case ProblemKind::Quadratic: return quadratic.size();
        }
        return 0;
    }

    void validate() const {
        require(schema_version == kSchemaVersion,
                "unsupported schema_version " + std::to_string(schema_version) + " (expected " +
                    std::to_string(kSchemaVersion) + ")");
        require(num_settings() >= 1, "at least one setting is required");
        require(!schemes.empty(), "at least one scheme is required");
        require(runs >= 2, "runs must be >= 2 for confidence intervals");
        require(record_every >= 1, "record_every must be >= 1");
        require(ci_level > 0.0 && ci_level < 1.0, "ci_level must lie in (0, 1)");
        require(!output_dir.empty(), "output_dir must be nonempty");
        require(reference.saa_samples >= 1000, "reference.saa_samples must be >= 1000");
        reference.validate();
        projection.validate();
        std::set<std::string> seen;
        for (const auto& s : schemes) {
            require(seen.insert(s.label).second, "duplicate scheme '" + s.label + "'");
            if (kind == ProblemKind::Bandwidth)
                require(s.smoothing == SmoothingKind::None,
                        "scheme '" + s.label + "': smoothing is not available for the bandwidth problem");
            if (kind == ProblemKind::Cournot && s.rule != StepRule::HSA)
                require(s.smoothing != SmoothingKind::None,
                        "scheme '" + s.label + "': adaptive rules on the Cournot problem need MSR or MCR smoothing");
        }
        std::set<std::string> names;
        auto check_name = [&](const std::string& n) { require(names.insert(n).second, "duplicate setting '" + n + "'"); };
        for (const auto& s : bandwidth) {
            s.validate();
            check_name(s.name);
        }
        for (const auto& s : cournot) {
            s.validate();
            check_name(s.name);
        }
        for (const auto& s : quadratic) {
            require(s.n >= 1, "quadratic setting " + s.name + ": n must be >= 1");
            require(s.noise >= 0.0 && s.rho >= 0.0 && s.eps > 0.0,
                    "quadratic setting " + s.name + ": invalid noise, rho or eps");
            check_name(s.name);
        }
    }
};

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || item.key() == a;
        if (!ok) throw ValidationError(where + ": unknown key '" + item.key() + "'");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + "." + key + ": " + e.what());
    }
}

inline problems::StartPoint parse_start(const std::string& s) {
    if (s == "P1") return problems::StartPoint::P1;
    if (s == "P2") return problems::StartPoint::P2;
    if (s == "P3") return problems::StartPoint::P3;
    throw ValidationError("unknown start point '" + s + "' (expected P1, P2 or P3)");
}

template <class T>
std::vector<T> select_settings(const json& spec, const std::vector<T>& defaults,
                               T (*from_object)(const json&, const std::string&)) {
    if (spec.is_string()) {
        if (spec.get<std::string>() != "default")
            throw ValidationError("problem.settings: expected \"default\", a list of names, or a list of objects");
        return defaults;
    }
    if (!spec.is_array()) throw ValidationError("problem.settings must be a string or an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const json& item = spec[i];
        if (item.is_string()) {
            const std::string name = item.get<std::string>();
            bool found = false;
            for (const auto& d : defaults) {
                if (d.name == name) {
                    out.push_back(d);
                    found = true;
                }
            }
            if (!found) throw ValidationError("problem.settings: no default setting named '" + name + "'");
        } else if (item.is_object()) {
            out.push_back(from_object(item, "problem.settings[" + std::to_string(i) + "]"));
        } else {
            throw ValidationError("problem.settings[" + std::to_string(i) + "] must be a name or an object");
        }
    }
    return out;
}

inline problems::BandwidthSettings bandwidth_from_json(const json& j, const std::string& where) {
    reject_unknown(j, {"name", "m_b", "m_c", "m_xi", "d_xi"}, where);
    problems::BandwidthSettings s;
    s.name = get_or<std::string>(j, "name", where, where);
    s.m_b = get_or<double>(j, "m_b", s.m_b, where);
    s.m_c = get_or<double>(j, "m_c", s.m_c, where);
    s.m_xi = get_or<double>(j, "m_xi", s.m_xi, where);
    s.d_xi = get_or<double>(j, "d_xi", s.d_xi, where);
    return s;
}

inline problems::CournotSettings cournot_from_json(const json& j, const std::string& where) {
    reject_unknown(j, {"name", "eps", "eta", "x0", "M_a", "cap", "cap_prime"}, where);
    problems::CournotSettings s;
    s.name = get_or<std::string>(j, "name", where, where);
    s.eps = get_or<double>(j, "eps", s.eps, where);
    s.eta_reg = get_or<double>(j, "eta", s.eta_reg, where);
    s.x0 = parse_start(get_or<std::string>(j, "x0", "P1", where));
    s.M_a = get_or<double>(j, "M_a", s.M_a, where);
    s.cap = get_or<double>(j, "cap", s.cap, where);
    s.cap_prime = get_or<double>(j, "cap_prime", s.cap_prime, where);
    return s;
}

inline QuadraticSettings quadratic_from_json(const json& j, const std::string& where) {
    reject_unknown(j, {"name", "n", "seed", "noise", "rho", "eps"}, where);
    QuadraticSettings s;
    s.name = get_or<std::string>(j, "name", where, where);
    s.n = get_or<std::size_t>(j, "n", s.n, where);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed, where);
    s.noise = get_or<double>(j, "noise", s.noise, where);
    s.rho = get_or<double>(j, "rho", s.rho, where);
    s.eps = get_or<double>(j, "eps", s.eps, where);
    return s;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    using detail::get_or;
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    detail::reject_unknown(j,
                           {"schema_version", "problem", "schemes", "runs", "iterations", "record_every", "base_seed",
                            "ci_level", "output_dir", "reference", "projection"},
                           "config");
    ExperimentConfig c;
    require(j.contains("schema_version"), "config: schema_version is required");
    c.schema_version = get_or<int>(j, "schema_version", 0, "config");
    require(j.contains("problem") && j["problem"].is_object(), "config: problem object is required");
    const json& p = j["problem"];
    detail::reject_unknown(p, {"kind", "settings"}, "problem");
    const std::string kind = get_or<std::string>(p, "kind", "", "problem");
    const json settings = p.contains("settings") ? p["settings"] : json("default");
    if (kind == "bandwidth") {
        c.kind = ProblemKind::Bandwidth;
        c.bandwidth = detail::select_settings(settings, problems::bandwidth_default_settings(), detail::bandwidth_from_json);
    } else if (kind == "cournot") {
        c.kind = ProblemKind::Cournot;
        c.cournot = detail::select_settings(settings, problems::cournot_default_settings(), detail::cournot_from_json);
    } else if (kind == "quadratic") {
        c.kind = ProblemKind::Quadratic;
        c.quadratic = detail::select_settings(settings, std::vector<QuadraticSettings>{QuadraticSettings{}},
                                              detail::quadratic_from_json);
    } else {
        throw ValidationError("problem.kind must be bandwidth, cournot or quadratic (got '" + kind + "')");
    }
    require(j.contains("schemes") && j["schemes"].is_array(), "config: schemes array is required");
    for (const auto& s : j["schemes"]) {
        require(s.is_string(), "config: schemes must be strings");
        c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    c.runs = get_or<std::size_t>(j, "runs", c.runs, "config");
    c.iterations = get_or<std::size_t>(j, "iterations", c.iterations, "config");
    c.record_every = get_or<std::size_t>(j, "record_every", c.record_every, "config");
    c.base_seed = get_or<std::uint64_t>(j, "base_seed", c.base_seed, "config");
    c.ci_level = get_or<double>(j, "ci_level", c.ci_level, "config");
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, "config");
    if (j.contains("reference")) {
        const json& r = j["reference"];
        detail::reject_unknown(r, {"saa_samples", "smoothing_samples", "tol", "max_iters"}, "reference");
        c.reference.saa_samples = get_or<std::size_t>(r, "saa_samples", c.reference.saa_samples, "reference");
        c.reference.smoothing_samples =
            get_or<std::size_t>(r, "smoothing_samples", c.reference.smoothing_samples, "reference");
        c.reference.tol = get_or<double>(r, "tol", c.reference.tol, "reference");
        c.reference.max_iters = get_or<std::size_t>(r, "max_iters", c.reference.max_iters, "reference");
    }
    if (j.contains("projection")) {
        const json& r = j["projection"];
        detail::reject_unknown(r, {"tol", "max_iters"}, "projection");
        c.projection.tol = get_or<double>(r, "tol", c.projection.tol, "projection");
        c.projection.max_iters = get_or<std::size_t>(r, "max_iters", c.projection.max_iters, "projection");
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

/// Config echo for reports.
inline json to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["problem"]["kind"] = to_string(c.kind);
    json settings = json::array();
    for (const auto& s : c.bandwidth)
        settings.push_back({{"name", s.name}, {"m_b", s.m_b}, {"m_c", s.m_c}, {"m_xi", s.m_xi}, {"d_xi", s.d_xi}});
    for (const auto& s : c.cournot)
        settings.push_back({{"name", s.name},
                            {"eps", s.eps},
                            {"eta", s.eta_reg},
                            {"x0", problems::to_string(s.x0)},
                            {"M_a", s.M_a},
                            {"cap", s.cap},
                            {"cap_prime", s.cap_prime}});
    for (const auto& s : c.quadratic)
        settings.push_back(
            {{"name", s.name}, {"n", s.n}, {"seed", s.seed}, {"noise", s.noise}, {"rho", s.rho}, {"eps", s.eps}});
    j["problem"]["settings"] = settings;
    json schemes = json::array();
    for (const auto& s : c.schemes) schemes.push_back(s.label);
    j["schemes"] = schemes;
    j["runs"] = c.runs;
    j["iterations"] = c.iterations;
    j["record_every"] = c.record_every;
    j["base_seed"] = c.base_seed;
    j["ci_level"] = c.ci_level;
    j["output_dir"] = c.output_dir;
    j["reference"] = {{"saa_samples", c.reference.saa_samples},
                      {"smoothing_samples", c.reference.smoothing_samples},
                      {"tol", c.reference.tol},
                      {"max_iters", c.reference.max_iters}};
    j["projection"] = {{"tol", c.projection.tol}, {"max_iters", c.projection.max_iters}};
    return j;
}

}  // namespace svi::bench
