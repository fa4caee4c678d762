#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "cmguide/app/scenario.hpp"

namespace cmguide::app {

/// Command-line overrides of the scenario's run section.
struct CommandOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<std::string> out_dir;
    bool plot = false;
    bool zero_noise = false;
    bool inject_fault = false;  ///< verify only: corrupt the induced gains to prove the checks can fail
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitVerification = 5;

RunConfig effective_run(const ScenarioConfig& cfg, const CommandOptions& opts);

/// params.json: every G_{k,k-1}, G_{k,N}, G_k of the object model (and of the guide's
/// CM_L law when the scenario has a destination), with conditioning diagnostics.
int cmd_derive(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// trajectory_XXXX.csv per run (capped by max_trajectory_files), terminal_gaps.csv,
/// simulate_summary.csv and, when plotting, simulate.svg.
int cmd_simulate(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// filter.csv (first run) and filter_summary.csv (NEES band and RMSE over all runs).
int cmd_filter(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// predict.csv (first run) and predict_mc.csv (analytic vs. Monte Carlo MSE per horizon).
int cmd_predict(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// verify_report.txt; returns kExitVerification if any check fails.
int cmd_verify(const std::optional<ScenarioConfig>& cfg, const CommandOptions& opts, std::ostream& log);

}  // namespace cmguide::app
