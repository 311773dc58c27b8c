// Command-line front end: scenario runs, config validation, CSV export.
// Exit codes: 0 success, 2 standing-hypothesis violation, 1 any other error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "conjlab/report.hpp"

namespace {

template <class Real>
int do_run(const conjlab::ScenarioConfig& cfg, const std::string& precision) {
    const std::string bundle_path =
        (std::filesystem::path(cfg.outdir) / "bundle.json").string();
    try {
        auto bundle = conjlab::run_scenario<Real>(cfg, precision);
        const std::string verdict = bundle["verdict"]["verdict"];
        std::cout << "verdict: " << verdict << "\n"
                  << "bundle:  " << bundle_path << "\n";
        return 0;
    } catch (const conjlab::HypothesisViolation& e) {
        // the bundle is written before the violation is raised
        std::cout << "verdict: hypothesis-violation\n"
                  << "bundle:  " << bundle_path << "\n";
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return 2;
    }
}

template <class Real>
int do_validate(const conjlab::ScenarioConfig& cfg) {
    int failures = 0;
    for (const char* side : {"map_f", "map_g"}) {
        const auto& mc = std::string(side) == "map_f" ? cfg.map_f : cfg.map_g;
        auto map = conjlab::make_map<Real>(mc);
        auto rep = conjlab::validate_multimodal(map);
        std::cout << side << ": " << map.label() << (rep.ok() ? "  ok" : "  FAIL") << "\n";
        if (!rep.ok()) {
            std::cout << rep.summary();
            ++failures;
        }
    }
    std::cout << "diagnostics:";
    if (cfg.diagnostics.empty()) std::cout << " (none)";
    for (const auto& d : cfg.diagnostics) std::cout << " " << d;
    std::cout << "\nconfig hash: " << conjlab::config_hash(cfg) << "\n";
    if (failures) {
        std::cerr << "hypothesis violation: map structure validation failed\n";
        return 2;
    }
    std::cout << "config ok\n";
    return 0;
}

int do_export(const std::string& bundle_path, const std::string& diagnostic,
              std::string out_dir) {
    auto bundle = conjlab::load_bundle(bundle_path);
    if (out_dir.empty())
        out_dir = std::filesystem::path(bundle_path).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
    auto files = conjlab::export_plot_data(bundle, diagnostic, out_dir);
    for (const auto& name : files)
        std::cout << (std::filesystem::path(out_dir) / name).string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval-map conjugacy laboratory"};
    app.require_subcommand(1);

    std::string config_path, bundle_path, diagnostic, out_dir;
    std::string precision = "double";
    int depth = 0;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "run a scenario and write its report bundle");
    run->add_option("config", config_path, "scenario file")->required();
    auto* run_depth = run->add_option("--depth", depth, "override refinement depth");
    auto* run_seed = run->add_option("--seed", seed, "override sampling seed");
    run->add_option("--out", out_dir, "override output directory");
    run->add_option("--precision", precision, "floating-point precision")
        ->check(CLI::IsMember({"double", "extended"}));

    auto* val = app.add_subcommand("validate", "check a scenario file and its map pair");
    val->add_option("config", config_path, "scenario file")->required();
    val->add_option("--precision", precision, "floating-point precision")
        ->check(CLI::IsMember({"double", "extended"}));

    auto* exp = app.add_subcommand("export", "write plot-ready CSV for one diagnostic");
    exp->add_option("bundle", bundle_path, "path to a bundle.json")->required();
    exp->add_option("diagnostic", diagnostic, "diagnostic id")->required();
    exp->add_option("--out", out_dir, "output directory (default: alongside the bundle)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) {
            auto cfg = conjlab::parse_scenario_file(config_path);
            if (run_depth->count()) cfg.depth = depth;
            if (run_seed->count()) cfg.seed = seed;
            if (!out_dir.empty()) cfg.outdir = out_dir;
            return precision == "extended" ? do_run<long double>(cfg, precision)
                                           : do_run<double>(cfg, precision);
        }
        if (app.got_subcommand(val)) {
            auto cfg = conjlab::parse_scenario_file(config_path);
            conjlab::validate_scenario(cfg);
            return precision == "extended" ? do_validate<long double>(cfg)
                                           : do_validate<double>(cfg);
        }
        return do_export(bundle_path, diagnostic, out_dir);
    } catch (const conjlab::HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return 2;
    } catch (const conjlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
