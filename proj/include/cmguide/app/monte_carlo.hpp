#pragma once

#include <cstdint>
#include <vector>

#include "cmguide/app/scenario.hpp"
#include "cmguide/estimation.hpp"
#include "cmguide/guided_model.hpp"
#include "cmguide/random.hpp"

namespace cmguide::app {

/// Two-sided interval for the average of `runs` independent NEES values of dimension `dof`:
/// runs * average ~ chi-square(runs * dof).
struct ChiSquareBand {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};
ChiSquareBand nees_band(int dof, int runs, double confidence = 0.95);

struct RunSample {
    GuidedPaths truth;
    MeasurementSeries measurements;
};

/// Draws Monte Carlo run r from stream (seed, r): the trajectories, then the measurements.
class RunSimulator {
public:
    RunSimulator(const ScenarioConfig& cfg, const ScenarioModels& models, Noise noise);

    GuidedPaths trajectories(std::uint64_t seed, int run) const;
    RunSample sample(std::uint64_t seed, int run) const;

private:
    const ScenarioConfig* cfg_;
    JointSampler sampler_;
    Noise noise_;
};

/// Euclidean distance between object and guide positions at k = N.
double terminal_gap(const ScenarioConfig& cfg, const GuidedPaths& paths);

/// 3 sqrt(trace of the position block of the terminal covariance).
double terminal_gap_bound(const ScenarioConfig& cfg);

struct TerminalGapStats {
    std::vector<double> gaps;  ///< per run
    double bound = 0.0;
    int within = 0;
    double fraction_within() const { return gaps.empty() ? 0.0 : static_cast<double>(within) / gaps.size(); }
};
TerminalGapStats terminal_gaps(const ScenarioConfig& cfg, const ScenarioModels& models, std::uint64_t seed, int runs,
                               Noise noise);

/// NEES dimension at step k. With a destination block the state at k = N repeats
/// d_N, so only [x; d] counts there.
int step_dof(const JointStateSpace& joint, int k);
double step_nees(const JointStateSpace& joint, const Vec& truth, const GaussianBelief& belief);

struct FilterStats {
    int runs = 0;
    int dof = 0;
    ChiSquareBand band;
    std::vector<int> step_dof;  ///< dof is smaller at k = N with a destination block
    std::vector<ChiSquareBand> step_band;
    std::vector<double> mean_nees;       ///< entry k-1 for k in [1, N]
    std::vector<double> object_pos_mse;  ///< mean squared position error per k
    std::vector<double> guide_pos_mse;
    std::vector<double> destination_pos_mse;  ///< empty without a destination block
    RunSample first_run;
    std::vector<GaussianBelief> first_beliefs;
};
FilterStats filter_monte_carlo(const ScenarioConfig& cfg, const ScenarioModels& models, std::uint64_t seed, int runs,
                               Noise noise);

struct PredictionStats {
    int from_k = 0;
    int runs = 0;
    std::vector<int> horizons;
    std::vector<GaussianBelief> analytic;  ///< s_{k+n|k}, Sigma_{k+n|k} of the first run, per horizon
    std::vector<Mat> sample_mse;           ///< mean (s - s_hat)(s - s_hat)' over runs, per horizon
    std::vector<double> relative_error;    ///< Frobenius, sample vs. analytic
    RunSample first_run;
};
/// Filters each run up to from_k, predicts n steps ahead for every horizon and compares
/// the analytic prediction MSE with the Monte Carlo one. Throws ConfigError if
/// from_k + n exceeds N - 1.
PredictionStats prediction_monte_carlo(const ScenarioConfig& cfg, const ScenarioModels& models, std::uint64_t seed,
                                       int runs, int from_k, const std::vector<int>& horizons, Noise noise);

}  // namespace cmguide::app
