#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmguide/app/commands.hpp"
#include "cmguide/app/scenario.hpp"
#include "cmguide/errors.hpp"

using namespace cmguide;
using namespace cmguide::app;

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    int runs = 0;
    std::string out;
    bool plot = false;
    bool zero_noise = false;
    bool inject_fault = false;
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
    auto* c = cmd->add_option("--config", f.config, "Scenario file (JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", f.seed, "Override run.seed");
    cmd->add_option("--runs", f.runs, "Override run.runs")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "Override run.out_dir");
    cmd->add_flag("--plot", f.plot, "Also write SVG plots");
    cmd->add_flag("--zero-noise", f.zero_noise, "Replace every process and measurement noise by zero");
}

int dispatch(const std::string& name, const Flags& f, const CLI::App& app) {
    CommandOptions opts;
    if (app.get_subcommand(name)->count("--seed")) opts.seed = f.seed;
    if (app.get_subcommand(name)->count("--runs")) opts.runs = f.runs;
    if (!f.out.empty()) opts.out_dir = f.out;
    opts.plot = f.plot;
    opts.zero_noise = f.zero_noise;
    opts.inject_fault = f.inject_fault;

    if (name == "verify") {
        std::optional<ScenarioConfig> cfg;
        if (!f.config.empty()) cfg = load_scenario(f.config);
        return cmd_verify(cfg, opts, std::cout);
    }
    const ScenarioConfig cfg = load_scenario(f.config);
    if (name == "derive") return cmd_derive(cfg, opts, std::cout);
    if (name == "simulate") return cmd_simulate(cfg, opts, std::cout);
    if (name == "filter") return cmd_filter(cfg, opts, std::cout);
    return cmd_predict(cfg, opts, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guided-object trajectory models: derive, simulate, filter, predict, verify"};
    app.require_subcommand(1);
    Flags flags;
    const char* names[] = {"derive", "simulate", "filter", "predict", "verify"};
    const char* help[] = {"Write the induced model parameters and conditioning diagnostics",
                          "Sample object/guide trajectories and terminal gaps",
                          "Run the recursive filter over Monte Carlo runs (NEES, RMSE)",
                          "n-step prediction with analytic and Monte Carlo MSE",
                          "Run the oracle and property checks"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* cmd = app.add_subcommand(names[i], help[i]);
        add_common(cmd, flags, i != 4);
        if (i == 4) cmd->add_flag("--inject-fault", flags.inject_fault)->group("");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return dispatch(name, flags, app);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IndexError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ResourceError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
