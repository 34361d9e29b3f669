// Command-line front end.
//
//   svi run       --config FILE [--output-dir DIR] [--runs R] [--iterations K] [--quiet]
//   svi reference --config FILE [--setting NAME] [--out FILE]
//   svi validate  --config FILE
//
// Exit status: 0 on success, 1 for invalid input, 2 for runtime failures.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "svi/bench/config.hpp"
#include "svi/bench/experiment.hpp"
#include "svi/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Parses the config, builds every instance and checks that each scheme's
// stepsize parameters are admissible; prints the resolved constants.
int cmd_validate(const std::string& path) {
    using namespace svi::bench;
    const ExperimentConfig cfg = load_config(path);
    const std::vector<PreparedSetting> settings = prepare_settings(cfg);
    for (const auto& s : settings) {
        for (const auto& scheme : cfg.schemes) scheme_schedules(scheme, s);
        std::cout << s.name << ' ' << s.constants.dump() << '\n';
    }
    std::cout << "config ok: " << to_string(cfg.kind) << ", " << cfg.num_settings() << " settings, "
              << cfg.schemes.size() << " schemes, " << cfg.runs << " runs x " << cfg.iterations << " iterations\n";
    return kExitOk;
}

int cmd_run(const std::string& path, const std::string& output_dir, std::size_t runs, std::size_t iterations,
            bool quiet) {
    svi::bench::ExperimentConfig cfg = svi::bench::load_config(path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (runs != 0) cfg.runs = runs;
    if (iterations != 0) cfg.iterations = iterations;
    cfg.validate();
    svi::bench::Logger log;
    if (!quiet) log = [](const std::string& msg) { std::cerr << "[svi] " << msg << '\n'; };
    const svi::bench::ExperimentReport report = svi::bench::run_experiment(cfg, log);
    svi::bench::write_outputs(report);
    if (!quiet) {
        for (const auto& c : report.cells)
            std::cout << c.setting << ' ' << c.scheme << " final mse " << svi::bench::format_number(c.final_mse())
                      << '\n';
        std::cout << "wrote " << cfg.output_dir << "/results.csv and " << cfg.output_dir << "/report.json\n";
    }
    return kExitOk;
}

int cmd_reference(const std::string& path, const std::string& setting, const std::string& out_path) {
    using namespace svi::bench;
    const ExperimentConfig cfg = load_config(path);
    const std::vector<PreparedSetting> settings = prepare_settings(cfg);
    json out = json::array();
    bool found = setting.empty();
    for (std::size_t si = 0; si < settings.size(); ++si) {
        const PreparedSetting& s = settings[si];
        if (!setting.empty() && s.name != setting) continue;
        found = true;
        std::vector<svi::SmoothingKind> kinds;
        for (const auto& scheme : cfg.schemes)
            if (std::find(kinds.begin(), kinds.end(), scheme.smoothing) == kinds.end())
                kinds.push_back(scheme.smoothing);
        for (svi::SmoothingKind kind : kinds) {
            const ReferenceResult r =
                setting_reference(s, kind, cfg.reference, reference_seed(cfg.base_seed, si, kind));
            const Eigen::VectorXd& x = r.x.flat();
            out.push_back({{"setting", s.name},
                           {"smoothing", svi::to_string(kind)},
                           {"x", std::vector<double>(x.data(), x.data() + x.size())},
                           {"residual", r.residual},
                           {"iterations", r.iterations}});
        }
    }
    if (!found) throw svi::ValidationError("no setting named '" + setting + "' in " + path);
    if (out_path.empty()) {
        std::cout << out.dump(2) << '\n';
    } else {
        std::ofstream file(out_path);
        if (!file) throw svi::IoError("cannot write " + out_path);
        file << out.dump(2) << '\n';
        if (!file) throw svi::IoError("write failed for " + out_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic approximation for Cartesian stochastic variational inequalities"};
    app.require_subcommand(1);

    std::string config, output_dir, setting, out_path;
    std::size_t runs = 0, iterations = 0;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment grid and write results.csv and report.json");
    run->add_option("-c,--config", config, "experiment config (JSON)")->required();
    run->add_option("-o,--output-dir", output_dir, "override the configured output directory");
    run->add_option("--runs", runs, "override the number of replications");
    run->add_option("--iterations", iterations, "override the iteration budget");
    run->add_flag("-q,--quiet", quiet, "suppress progress output");

    CLI::App* reference = app.add_subcommand("reference", "compute the reference solutions of a config");
    reference->add_option("-c,--config", config, "experiment config (JSON)")->required();
    reference->add_option("-s,--setting", setting, "restrict to one setting");
    reference->add_option("--out", out_path, "write the references to this file instead of stdout");

    CLI::App* validate = app.add_subcommand("validate", "check a config and its constants without running it");
    validate->add_option("-c,--config", config, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) return cmd_run(config, output_dir, runs, iterations, quiet);
        if (reference->parsed()) return cmd_reference(config, setting, out_path);
        if (validate->parsed()) return cmd_validate(config);
    } catch (const svi::ValidationError& e) {
        std::cerr << "svi: invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const svi::DimensionError& e) {
        std::cerr << "svi: invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "svi: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
