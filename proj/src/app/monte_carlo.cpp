#include "cmguide/app/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "cmguide/errors.hpp"
#include "cmguide/parallel.hpp"

namespace cmguide::app {

ChiSquareBand nees_band(int dof, int runs, double confidence) {
    if (dof < 1 || runs < 1) throw ConfigError("nees_band: dof and runs must be positive");
    const boost::math::chi_squared dist(static_cast<double>(dof) * runs);
    const double tail = 0.5 * (1.0 - confidence);
    return ChiSquareBand{boost::math::quantile(dist, tail) / runs, boost::math::quantile(dist, 1.0 - tail) / runs};
}

RunSimulator::RunSimulator(const ScenarioConfig& cfg, const ScenarioModels& models, Noise noise)
    : cfg_(&cfg), sampler_(models.joint), noise_(noise) {}

GuidedPaths RunSimulator::trajectories(std::uint64_t seed, int run) const {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(run));
    return split_paths(sampler_.model(), sampler_.sample(rng, noise_));
}

RunSample RunSimulator::sample(std::uint64_t seed, int run) const {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(run));
    RunSample s;
    s.truth = split_paths(sampler_.model(), sampler_.sample(rng, noise_));
    s.measurements = simulate_measurements(s.truth.object, s.truth.guide, cfg_->measurement, rng, noise_);
    return s;
}

double terminal_gap(const ScenarioConfig& cfg, const GuidedPaths& paths) {
    const int n = paths.object.horizon();
    return (position_selector_for(cfg) * (paths.object[n] - paths.guide[n])).norm();
}

double terminal_gap_bound(const ScenarioConfig& cfg) {
    const Mat p = position_selector_for(cfg);
    return 3.0 * std::sqrt((p * cfg.terminal_cov * p.transpose()).trace());
}

TerminalGapStats terminal_gaps(const ScenarioConfig& cfg, const ScenarioModels& models, std::uint64_t seed, int runs,
                               Noise noise) {
    const RunSimulator sim(cfg, models, noise);
    TerminalGapStats stats;
    stats.gaps.assign(static_cast<std::size_t>(runs), 0.0);
    stats.bound = terminal_gap_bound(cfg);
    parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
        stats.gaps[r] = terminal_gap(cfg, sim.trajectories(seed, static_cast<int>(r)));
    });
    stats.within = static_cast<int>(
        std::count_if(stats.gaps.begin(), stats.gaps.end(), [&](double g) { return g < stats.bound; }));
    return stats;
}

namespace {

double squared_position_error(const Mat& p, const Vec& truth, const Vec& estimate) {
    return (p * (truth - estimate)).squaredNorm();
}

}  // namespace

int step_dof(const JointStateSpace& joint, int k) {
    return joint.has_destination && k == joint.horizon ? 2 * joint.block_dim : joint.dim();
}

double step_nees(const JointStateSpace& joint, const Vec& truth, const GaussianBelief& belief) {
    const int m = step_dof(joint, belief.k);
    return nees(truth.head(m), belief.mean.head(m), belief.cov.topLeftCorner(m, m));
}

FilterStats filter_monte_carlo(const ScenarioConfig& cfg, const ScenarioModels& models, std::uint64_t seed, int runs,
                               Noise noise) {
    const RunSimulator sim(cfg, models, noise);
    const JointStateSpace& joint = models.joint;
    const int n = joint.horizon;
    const Mat p = position_selector_for(cfg);
    const int d = joint.block_dim;

    struct PerRun {
        std::vector<double> nees, object, guide, destination;
    };
    std::vector<PerRun> slots(static_cast<std::size_t>(runs));
    parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
        const RunSample s = sim.sample(seed, static_cast<int>(r));
        const auto beliefs = run_filter(joint, cfg.measurement, s.measurements, prior_belief(joint));
        PerRun& out = slots[r];
        for (const GaussianBelief& b : beliefs) {
            const Vec& truth = s.truth.stacked[b.k];
            out.nees.push_back(noise == Noise::Zero ? 0.0 : step_nees(joint, truth, b));
            out.object.push_back(squared_position_error(p, truth.segment(joint.offset(Block::Object), d),
                                                        b.mean.segment(joint.offset(Block::Object), d)));
            out.guide.push_back(squared_position_error(p, truth.segment(joint.offset(Block::Guide), d),
                                                       b.mean.segment(joint.offset(Block::Guide), d)));
            if (joint.has_destination)
                out.destination.push_back(squared_position_error(p, truth.segment(joint.offset(Block::Destination), d),
                                                                 b.mean.segment(joint.offset(Block::Destination), d)));
        }
    });

    FilterStats stats;
    stats.runs = runs;
    stats.dof = joint.dim();
    stats.band = nees_band(stats.dof, runs);
    const auto steps = static_cast<std::size_t>(n);
    for (int k = 1; k <= n; ++k) {
        stats.step_dof.push_back(step_dof(joint, k));
        stats.step_band.push_back(stats.step_dof.back() == stats.dof ? stats.band : nees_band(stats.step_dof.back(), runs));
    }
    stats.mean_nees.assign(steps, 0.0);
    stats.object_pos_mse.assign(steps, 0.0);
    stats.guide_pos_mse.assign(steps, 0.0);
    if (joint.has_destination) stats.destination_pos_mse.assign(steps, 0.0);
    for (const PerRun& r : slots) {
        for (std::size_t i = 0; i < steps; ++i) {
            stats.mean_nees[i] += r.nees[i] / runs;
            stats.object_pos_mse[i] += r.object[i] / runs;
            stats.guide_pos_mse[i] += r.guide[i] / runs;
            if (joint.has_destination) stats.destination_pos_mse[i] += r.destination[i] / runs;
        }
    }
    stats.first_run = sim.sample(seed, 0);
    stats.first_beliefs = run_filter(joint, cfg.measurement, stats.first_run.measurements, prior_belief(joint));
    return stats;
}

PredictionStats prediction_monte_carlo(const ScenarioConfig& cfg, const ScenarioModels& models, std::uint64_t seed,
                                       int runs, int from_k, const std::vector<int>& horizons, Noise noise) {
    const JointStateSpace& joint = models.joint;
    if (horizons.empty()) throw ConfigError("predict: no horizons given");
    const int longest = *std::max_element(horizons.begin(), horizons.end());
    if (from_k < 0 || *std::min_element(horizons.begin(), horizons.end()) < 0 || from_k + longest > joint.horizon - 1)
        throw ConfigError("predict: need 0 <= predict_from and predict_from + n <= N-1 = " +
                          std::to_string(joint.horizon - 1) + " (got predict_from=" + std::to_string(from_k) +
                          ", n=" + std::to_string(longest) + ")");

    const RunSimulator sim(cfg, models, noise);
    const std::size_t h = horizons.size();
    std::vector<std::vector<Mat>> outer(static_cast<std::size_t>(runs));

    auto predict_run = [&](const RunSample& s) {
        const MeasurementSeries past(s.measurements.begin(), s.measurements.begin() + from_k);
        const auto beliefs = run_filter(joint, cfg.measurement, past, prior_belief(joint));
        const GaussianBelief at_k = beliefs.empty() ? prior_belief(joint) : beliefs.back();
        std::vector<GaussianBelief> preds;
        for (int n : horizons) preds.push_back(predict_n(at_k, n, joint));
        return preds;
    };

    parallel_for(static_cast<std::size_t>(runs), [&](std::size_t r) {
        const RunSample s = sim.sample(seed, static_cast<int>(r));
        const auto preds = predict_run(s);
        for (std::size_t i = 0; i < h; ++i) {
            const Vec e = s.truth.stacked[preds[i].k] - preds[i].mean;
            outer[r].push_back(e * e.transpose());
        }
    });

    PredictionStats stats;
    stats.from_k = from_k;
    stats.runs = runs;
    stats.horizons = horizons;
    stats.first_run = sim.sample(seed, 0);
    stats.analytic = predict_run(stats.first_run);
    for (std::size_t i = 0; i < h; ++i) {
        Mat mse = Mat::Zero(joint.dim(), joint.dim());
        for (const auto& r : outer) mse += r[i];
        mse /= runs;
        stats.relative_error.push_back(relative_error(mse, stats.analytic[i].cov));
        stats.sample_mse.push_back(std::move(mse));
    }
    return stats;
}

}  // namespace cmguide::app
