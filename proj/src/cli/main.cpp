#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "flagwave/suites.hpp"

namespace {

constexpr int kPass = 0, kFail = 1, kConfig = 2;

bool needs_calibration(flagwave::Suite s) {
    using flagwave::Suite;
    return s == Suite::ortho || s == Suite::flag_ortho || s == Suite::bound;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete flag Littlewood-Paley experiments on the Heisenberg group"};
    std::string suite_arg, config_path, out_arg;
    std::uint64_t seed = 0;
    int grid_scale = 1;
    std::string suites;
    for (const std::string& s : flagwave::suite_names()) suites += (suites.empty() ? "" : ", ") + s;
    app.add_option("suite", suite_arg, "one of: " + suites)->required();
    app.add_option("--config", config_path, "experiment configuration (key = value with [sections])")->required();
    app.add_option("--out", out_arg, "output directory (default: [general] out)");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "overrides [general] seed");
    app.add_option("--grid-scale", grid_scale, "1, or 2 to refine every suite grid once")
        ->check(CLI::IsMember({1, 2}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        const flagwave::Suite suite = flagwave::parse_suite(suite_arg);
        flagwave::ExperimentConfig cfg = flagwave::load_config(config_path).with_grid_scale(grid_scale);
        if (seed_opt->count()) cfg.seed = seed;
        std::filesystem::path out = out_arg;
        if (out.empty()) {
            if (cfg.out.empty()) throw flagwave::UsageError("no output directory: pass --out or set [general] out");
            out = cfg.out.is_absolute() ? cfg.out : cfg.base_dir / cfg.out;
        }
        std::optional<flagwave::Calibration> cal;
        if (needs_calibration(suite)) cal = flagwave::Calibration::load(cfg.calibration_path());

        const flagwave::SuiteResult res = flagwave::run_suite(suite, cfg, out, cal ? &*cal : nullptr);
        for (const flagwave::Check& c : res.checks)
            std::printf("%s  %s: %s\n", c.pass ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
        std::printf("%s %s (%.1f s) -> %s\n", res.pass() ? "PASS" : "FAIL", res.suite.c_str(), res.seconds,
                    out.string().c_str());
        return res.pass() ? kPass : kFail;
    } catch (const flagwave::Error& e) {
        // Configuration, usage and resolvability errors all stop before a verdict.
        std::cerr << "flagwave: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "flagwave: " << e.what() << '\n';
        return kFail;
    }
}
