#pragma once

// Experiment grid: every (setting, scheme) cell runs R replications from the
// setting's start point, compares them with a sample-average reference
// solution, and reports the mean squared error with a confidence interval at
// each recorded iteration. Output files are written only after the whole grid
// has finished.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "svi/bench/config.hpp"
#include "svi/bench/reference.hpp"
#include "svi/bench/stats.hpp"
#include "svi/engine.hpp"
#include "svi/error.hpp"
#include "svi/problems/bandwidth.hpp"
#include "svi/problems/cournot.hpp"
#include "svi/problems/quadratic.hpp"
#include "svi/smoothing.hpp"
#include "svi/stepsizes.hpp"

namespace svi::bench {

/// One setting resolved into a problem instance together with everything the
/// schemes need: start point, smoothing schemes and adaptive-rule parameters.
struct PreparedSetting {
    std::string name;
    ProblemKind kind = ProblemKind::Bandwidth;
    std::unique_ptr<VIProblem> problem;  ///< heap-allocated: runs keep a pointer
    BlockVector x0;
    double eps = 0.0;
    json constants;
    std::function<SchemeParams(SmoothingKind)> params;

    SmoothingScheme smoothing(SmoothingKind k) const {
        if (k == SmoothingKind::None) return SmoothingScheme::none();
        return SmoothingScheme{k, std::vector<double>(problem->groups().num_blocks(), eps)};
    }
};

inline PreparedSetting prepare_bandwidth(const problems::BandwidthSettings& s, std::uint64_t seed) {
    const problems::BandwidthInstance inst = problems::bandwidth_instance(s, seed);
    PreparedSetting p;
    p.name = s.name;
    p.kind = ProblemKind::Bandwidth;
    p.problem = std::make_unique<VIProblem>(inst.problem);
    p.x0 = inst.start();
    const SchemeParams params = inst.dasa_params();
    p.params = [params](SmoothingKind) { return params; };
    const auto& k = inst.constants;
    p.constants = {{"eta", k.eta}, {"L", k.lip},          {"nu", k.nu}, {"noise_sq", k.noise_sq},
                   {"D", k.diameter}, {"c", k.c},         {"r", k.r},   {"lambda_min_ata", k.lambda_min_ata},
                   {"norm_ata", k.norm_ata}};
    return p;
}

inline PreparedSetting prepare_cournot(const problems::CournotSettings& s, std::uint64_t seed) {
    const problems::CournotInstance inst = problems::cournot_instance(s, seed);
    PreparedSetting p;
    p.name = s.name;
    p.kind = ProblemKind::Cournot;
    p.problem = std::make_unique<VIProblem>(inst.problem);
    p.x0 = inst.x0;
    p.eps = s.eps;
    const SchemeParams msr = inst.dasa_params(SmoothingKind::MSR);
    const SchemeParams mcr = inst.dasa_params(SmoothingKind::MCR);
    p.params = [msr, mcr](SmoothingKind k) {
        require(k != SmoothingKind::None, "cournot: adaptive rules need a smoothed map");
        return k == SmoothingKind::MSR ? msr : mcr;
    };
    const auto& k = inst.constants;
    p.constants = {{"eta", k.eta},
                   {"comp_bounds", k.comp_bounds},
                   {"noise_sq", k.noise_sq},
                   {"D", k.diameter},
                   {"L_msr", msr.lip},
                   {"L_mcr", mcr.lip},
                   {"nu", msr.nu},
                   {"c", msr.c},
                   {"r_msr", k.r_msr},
                   {"r_mcr", k.r_mcr}};
    return p;
}

inline PreparedSetting prepare_quadratic(const QuadraticSettings& s) {
    const problems::QuadraticInstance inst = s.rho > 0.0 ? problems::kinked_quadratic_instance(s.n, s.seed, s.rho, s.noise)
                                                         : problems::quadratic_instance(s.n, s.seed, s.noise);
    PreparedSetting p;
    p.name = s.name;
    p.kind = ProblemKind::Quadratic;
    p.problem = std::make_unique<VIProblem>(inst.problem);
    p.x0 = BlockVector(inst.problem.groups());
    p.eps = s.eps;
    SchemeParams params;
    params.eta = inst.eta;
    params.lip = inst.lip;  // smoothing by averaging does not increase the Lipschitz constant
    params.diameter = (inst.upper - inst.lower).norm();
    params.e0 = params.diameter * params.diameter;
    params.c = params.eta / 4.0;
    params.beta = (params.eta - 2.0 * params.c) / params.lip;
    params.r.assign(s.n, 1.0);
    params.nu = std::max(std::sqrt(inst.noise_sq), params.diameter * params.lip / std::sqrt(2.0));
    p.params = [params](SmoothingKind) { return params; };
    p.constants = {{"eta", inst.eta}, {"L", inst.lip}, {"nu", params.nu}, {"noise_sq", inst.noise_sq},
                   {"D", params.diameter}};
    return p;
}

inline std::vector<PreparedSetting> prepare_settings(const ExperimentConfig& cfg) {
    std::vector<PreparedSetting> out;
    for (const auto& s : cfg.bandwidth) out.push_back(prepare_bandwidth(s, cfg.base_seed));
    for (const auto& s : cfg.cournot) out.push_back(prepare_cournot(s, cfg.base_seed));
    for (const auto& s : cfg.quadratic) out.push_back(prepare_quadratic(s));
    return out;
}

/// Stepsize schedules of a scheme on a prepared setting: one shared harmonic
/// schedule, one centralized adaptive schedule, or one adaptive schedule per
/// agent.
inline std::vector<StepsizeSchedule> scheme_schedules(const SchemeSpec& scheme, const PreparedSetting& setting) {
    switch (scheme.rule) {
        case StepRule::HSA: return {StepsizeSchedule::harmonic(scheme.theta)};
        case StepRule::ASA: {
            SchemeParams p = setting.params(scheme.smoothing);
            p.beta = 0.0;
            return {StepsizeSchedule::asa(p)};
        }
        case StepRule::DASA: {
            const SchemeParams p = setting.params(scheme.smoothing);
            std::vector<StepsizeSchedule> out;
            for (std::size_t i = 0; i < p.r.size(); ++i) out.push_back(StepsizeSchedule::dasa(p, i));
            return out;
        }
    }
    return {};
}

/// Seed of the reference sample set of a setting, independent of the run seeds.
inline std::uint64_t reference_seed(std::uint64_t base_seed, std::size_t setting_index, SmoothingKind kind) {
    Rng r = Rng::substream(base_seed ^ 0x5245464552454e43ull, setting_index * 3 + static_cast<std::size_t>(kind));
    return r.next_u64();
}

struct CellRow {
    std::size_t k = 0;
    double mse = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct CellResult {
    std::string scheme;
    std::string setting;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    std::vector<CellRow> rows;
    std::vector<double> final_errors;  ///< ||x_K - x_ref||^2 per run, in seed order
    std::vector<double> wall_seconds;  ///< per run; reported in JSON only

    double initial_mse() const { return rows.front().mse; }
    double final_mse() const { return rows.back().mse; }
};

struct ReferenceInfo {
    std::string setting;
    SmoothingKind smoothing = SmoothingKind::None;
    ReferenceResult result;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<json> setting_constants;  ///< in setting order, with the setting name
    std::vector<ReferenceInfo> references;
    std::vector<CellResult> cells;        ///< setting-major, schemes in config order

    const CellResult& cell(const std::string& setting, const std::string& scheme) const {
        for (const auto& c : cells)
            if (c.setting == setting && c.scheme == scheme) return c;
        throw ValidationError("no cell for setting '" + setting + "' and scheme '" + scheme + "'");
    }
};

using Logger = std::function<void(const std::string&)>;

/// Reference solution of a prepared setting: first the exact-mean problem,
/// then the sample-average problem warm-started from it.
inline ReferenceResult setting_reference(const PreparedSetting& setting, SmoothingKind kind, const ReferenceConfig& base,
                                         std::uint64_t seed) {
    ReferenceConfig warm = base;
    warm.use_exact_mean = true;
    std::optional<Eigen::VectorXd> start;
    if (setting.problem->map.has_exact_mean()) {
        const ReferenceResult w = reference_solution(*setting.problem, SmoothingScheme::none(), warm, setting.x0.flat());
        start = w.x.flat();
    }
    ReferenceConfig cfg = base;
    cfg.seed = seed;
    return reference_solution(*setting.problem, setting.smoothing(kind), cfg, start ? start : setting.x0.flat());
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, const Logger& log = {}) {
    cfg.validate();
    ExperimentReport report;
    report.config = cfg;
    std::vector<PreparedSetting> settings = prepare_settings(cfg);
    for (std::size_t si = 0; si < settings.size(); ++si) {
        PreparedSetting& s = settings[si];
        json c = s.constants;
        c["setting"] = s.name;
        report.setting_constants.push_back(std::move(c));

        std::map<SmoothingKind, BlockVector> refs;
        for (const auto& scheme : cfg.schemes) {
            if (refs.count(scheme.smoothing)) continue;
            if (log) log("reference " + s.name + " " + to_string(scheme.smoothing));
            ReferenceResult r = setting_reference(s, scheme.smoothing, cfg.reference,
                                                  reference_seed(cfg.base_seed, si, scheme.smoothing));
            refs.emplace(scheme.smoothing, r.x);
            report.references.push_back({s.name, scheme.smoothing, std::move(r)});
        }

        for (const auto& scheme : cfg.schemes) {
            if (log) log("run " + s.name + " " + scheme.label);
            RunConfig rc;
            rc.problem = s.problem.get();
            rc.schedules = scheme_schedules(scheme, s);
            rc.smoothing = s.smoothing(scheme.smoothing);
            rc.x0 = s.x0;
            rc.iterations = cfg.iterations;
            rc.record_every = cfg.record_every;
            rc.projection = cfg.projection;
            const ReplicationResult rep = run_replications(rc, cfg.runs, cfg.base_seed, refs.at(scheme.smoothing));
            CellResult cell;
            cell.scheme = scheme.label;
            cell.setting = s.name;
            cell.runs = cfg.runs;
            cell.seed = cfg.base_seed;
            for (const auto& run : rep.runs) {
                cell.final_errors.push_back(run.final_sq_dist);
                cell.wall_seconds.push_back(run.wall_seconds);
            }
            std::vector<double> samples(cfg.runs);
            for (std::size_t j = 0; j < rep.ks.size(); ++j) {
                for (std::size_t r = 0; r < cfg.runs; ++r) samples[r] = rep.runs[r].sq_dist[j];
                const ConfidenceInterval ci = confidence_interval(samples, cfg.ci_level);
                cell.rows.push_back({rep.ks[j], rep.mse[j], ci.lo, ci.hi});
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_csv(const ExperimentReport& report, std::ostream& out) {
    out << "scheme,setting,k,mse,ci_lo,ci_hi,runs,seed\n";
    for (const auto& c : report.cells)
        for (const auto& row : c.rows)
            out << c.scheme << ',' << c.setting << ',' << row.k << ',' << format_number(row.mse) << ','
                << format_number(row.ci_lo) << ',' << format_number(row.ci_hi) << ',' << c.runs << ',' << c.seed
                << '\n';
}

inline json report_json(const ExperimentReport& report) {
    json j;
    j["config"] = to_json(report.config);
    j["constants"] = report.setting_constants;
    json refs = json::array();
    for (const auto& r : report.references) {
        const Eigen::VectorXd& x = r.result.x.flat();
        refs.push_back({{"setting", r.setting},
                        {"smoothing", to_string(r.smoothing)},
                        {"x", std::vector<double>(x.data(), x.data() + x.size())},
                        {"residual", r.result.residual},
                        {"iterations", r.result.iterations}});
    }
    j["references"] = refs;
    json cells = json::array();
    for (const auto& c : report.cells)
        cells.push_back({{"scheme", c.scheme},
                         {"setting", c.setting},
                         {"initial_mse", c.initial_mse()},
                         {"final_mse", c.final_mse()},
                         {"final_ci", {c.rows.back().ci_lo, c.rows.back().ci_hi}},
                         {"final_errors", c.final_errors},
                         {"wall_seconds", c.wall_seconds}});
    j["cells"] = cells;
    return j;
}

/// Writes results.csv and report.json into the configured output directory.
inline void write_outputs(const ExperimentReport& report) {
    namespace fs = std::filesystem;
    const fs::path dir(report.config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    {
        std::ofstream out(dir / "results.csv");
        if (!out) throw IoError("cannot write " + (dir / "results.csv").string());
        write_csv(report, out);
        if (!out) throw IoError("write failed for " + (dir / "results.csv").string());
    }
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw IoError("cannot write " + (dir / "report.json").string());
        out << report_json(report).dump(2) << '\n';
        if (!out) throw IoError("write failed for " + (dir / "report.json").string());
    }
}

}  // namespace svi::bench
