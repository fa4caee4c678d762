#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cmguide/cml_model.hpp"
#include "cmguide/estimation.hpp"
#include "cmguide/guided_model.hpp"
#include "cmguide/markov_model.hpp"

namespace cmguide::app {

/// Guide destination law for the CM_L-guided variant: d_N ~ N(mean, cov) with Cov(d_N, d_0) = cross_cov.
struct DestinationConfig {
    Vec mean;
    Mat cov;
    Mat cross_cov;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int runs = 100;
    int predict_from = 0;
    std::vector<int> horizons{0, 1, 5, 10};
    std::string out_dir = "out";
    int max_trajectory_files = 10;
    bool plot = false;
};

/// Everything a command needs, parsed from one JSON file. Unknown keys are rejected.
struct ScenarioConfig {
    std::string label = "scenario";
    std::optional<NcvConfig> ncv;  ///< set for the NCV model section, empty for an explicit (F, Q)
    int horizon = 0;
    Mat F;
    Mat Q;
    GaussianPrior guide_init;
    std::optional<DestinationConfig> destination;
    GaussianPrior object_init;
    Mat terminal_cov;
    MeasurementModel measurement;
    RunConfig run;

    int dim() const { return static_cast<int>(F.rows()); }
};

ScenarioConfig parse_scenario(const nlohmann::json& j);

/// Throws IoError if the file cannot be read, ConfigError if it is not a valid scenario.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// The scenario's models, ready for sampling and filtering.
struct ScenarioModels {
    MarkovModel guide;
    std::optional<GuidedSystem> markov_guided;
    std::optional<DestinationGuidedSystem> cml_guided;
    JointStateSpace joint;

    bool has_destination() const { return cml_guided.has_value(); }
    const ObjectEvolution& object() const { return cml_guided ? cml_guided->object : markov_guided->object; }
};

ScenarioModels build_models(const ScenarioConfig& cfg);

/// Names of one target's state components: pos_x, vel_x, pos_y, vel_y for a planar
/// NCV state, pos, vel for a single axis, s0, s1, ... otherwise.
std::vector<std::string> component_names(const ScenarioConfig& cfg);

/// Rows of one target's state that hold positions (the whole state for a custom model).
Mat position_selector_for(const ScenarioConfig& cfg);

}  // namespace cmguide::app
