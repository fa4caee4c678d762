#include "cmguide/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmguide/app/monte_carlo.hpp"
#include "cmguide/app/output.hpp"
#include "cmguide/checks.hpp"
#include "cmguide/cml_model.hpp"
#include "cmguide/errors.hpp"

namespace cmguide::app {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

RunConfig effective_run(const ScenarioConfig& cfg, const CommandOptions& opts) {
    RunConfig run = cfg.run;
    if (opts.seed) run.seed = *opts.seed;
    if (opts.runs) {
        if (*opts.runs < 1) throw ConfigError("--runs must be at least 1");
        run.runs = *opts.runs;
    }
    if (opts.out_dir) run.out_dir = *opts.out_dir;
    run.plot = run.plot || opts.plot;
    return run;
}

namespace {

Noise noise_of(const CommandOptions& opts) { return opts.zero_noise ? Noise::Zero : Noise::Sampled; }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

ordered_json to_json(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json to_json(const Vec& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

struct StepDiagnostics {
    double min_eig = std::numeric_limits<double>::infinity();
    double max_cond = 0.0;
    int max_cond_k = 0;
    bool all_spd = true;
};

ordered_json steps_json(const CmlParams& p, const std::vector<Mat>& controllability, StepDiagnostics& diag) {
    ordered_json steps = ordered_json::array();
    for (int k = 1; k <= p.horizon - 1; ++k) {
        const SpdReport g = inspect_spd(p.noise(k));
        const double cond = inspect_spd(controllability[static_cast<std::size_t>(k)]).condition();
        diag.all_spd = diag.all_spd && g.positive_definite();
        diag.min_eig = std::min(diag.min_eig, g.min_eigenvalue);
        if (cond > diag.max_cond) diag.max_cond = cond, diag.max_cond_k = k;
        ordered_json s;
        s["k"] = k;
        s["G_prev"] = to_json(p.prev(k));
        s["G_dest"] = to_json(p.dest(k));
        s["G_noise"] = to_json(p.noise(k));
        s["cond_C"] = cond;
        s["min_eig_G"] = g.min_eigenvalue;
        steps.push_back(std::move(s));
    }
    return steps;
}

std::vector<std::string> block_prefixes(const JointStateSpace& joint) {
    if (joint.has_destination) return {"x", "d", "dN"};
    return {"x", "d"};
}

std::vector<std::pair<double, double>> planar_path(const ScenarioConfig& cfg, const Trajectory& t) {
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k <= t.horizon(); ++k) {
        if (cfg.ncv && cfg.ncv->planar)
            pts.emplace_back(t[k](0), t[k](2));
        else
            pts.emplace_back(static_cast<double>(k), t[k](0));
    }
    return pts;
}

std::string plot_axes_x(const ScenarioConfig& cfg) { return cfg.ncv && cfg.ncv->planar ? "position x" : "k"; }
std::string plot_axes_y(const ScenarioConfig& cfg) {
    return cfg.ncv && cfg.ncv->planar ? "position y" : component_names(cfg).front();
}

}  // namespace

int cmd_derive(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    const RunConfig run = effective_run(cfg, opts);
    const ScenarioModels models = build_models(cfg);
    const int n = cfg.horizon;

    // Object parameters from the stationary formulas; C_{N|k} from the same (F, Q).
    const CmlParams object = derive_induced_params_stationary(cfg.F, cfg.Q, n, cfg.object_init.cov);
    const DestinationAggregates agg = destination_aggregates(
        MarkovModel::time_invariant(cfg.F, cfg.Q, n, Vec::Zero(cfg.dim()), cfg.object_init.cov));

    StepDiagnostics diag;
    ordered_json out;
    out["label"] = cfg.label;
    out["N"] = n;
    out["dim"] = cfg.dim();
    out["F"] = to_json(cfg.F);
    out["Q"] = to_json(cfg.Q);
    out["object"]["steps"] = steps_json(object, agg.controllability, diag);
    out["object"]["terminal_cov"] = to_json(cfg.terminal_cov);

    if (models.cml_guided) {
        const CmlParams& g = models.cml_guided->guide_cml;
        const DestinationAggregates gagg = destination_aggregates(models.guide);
        StepDiagnostics gdiag;
        out["guide_cml"]["steps"] = steps_json(g, gagg.controllability, gdiag);
        out["guide_cml"]["boundary"]["G_N0"] = to_json(g.boundary.final_from_initial);
        out["guide_cml"]["boundary"]["G_N"] = to_json(g.boundary.final_cov);
        out["guide_cml"]["boundary"]["G_0"] = to_json(g.boundary.initial_cov);
        out["guide_cml"]["boundary"]["mean_initial"] = to_json(g.mean_initial);
        out["guide_cml"]["boundary"]["mean_final"] = to_json(g.mean_final);
        diag.all_spd = diag.all_spd && gdiag.all_spd;
    }

    ensure_directory(run.out_dir);
    write_text(fs::path(run.out_dir) / "params.json", out.dump(2) + "\n");
    log << "derive: " << (n - 1) << " parameter triples (k = 1.." << (n - 1) << "), "
        << (diag.all_spd ? "all G_k SPD" : "NOT all G_k SPD") << "\n"
        << "derive: smallest eigenvalue of G_k " << sci(diag.min_eig) << ", largest condition number of C_{N|k} "
        << sci(diag.max_cond) << " at k=" << diag.max_cond_k << "\n"
        << "derive: wrote " << (fs::path(run.out_dir) / "params.json").string() << "\n";
    if (!diag.all_spd) throw NumericError("derived G_k is not positive definite");
    return kExitOk;
}

int cmd_simulate(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    const RunConfig run = effective_run(cfg, opts);
    const ScenarioModels models = build_models(cfg);
    const Noise noise = noise_of(opts);
    ensure_directory(run.out_dir);

    const RunSimulator sim(cfg, models, noise);
    const std::vector<std::string> comps = component_names(cfg);
    std::vector<std::string> header{"k"};
    for (const char* target : {"x", "d"})
        for (const std::string& c : comps) header.push_back(std::string(target) + "_" + c);

    const int files = std::min(run.runs, run.max_trajectory_files);
    for (int r = 0; r < files; ++r) {
        const GuidedPaths p = sim.trajectories(run.seed, r);
        Csv csv(header);
        for (int k = 0; k <= cfg.horizon; ++k) {
            csv.cell(k);
            for (Eigen::Index i = 0; i < p.object[k].size(); ++i) csv.cell(p.object[k](i));
            for (Eigen::Index i = 0; i < p.guide[k].size(); ++i) csv.cell(p.guide[k](i));
            csv.end_row();
        }
        char name[64];
        std::snprintf(name, sizeof name, "trajectory_%04d.csv", r);
        write_text(fs::path(run.out_dir) / name, csv.str());
    }

    const TerminalGapStats gaps = terminal_gaps(cfg, models, run.seed, run.runs, noise);
    Csv gap_csv({"run", "gap", "bound", "within"});
    for (int r = 0; r < run.runs; ++r) {
        const double g = gaps.gaps[static_cast<std::size_t>(r)];
        gap_csv.cell(r).cell(g).cell(gaps.bound).cell(g < gaps.bound ? 1 : 0);
        gap_csv.end_row();
    }
    write_text(fs::path(run.out_dir) / "terminal_gaps.csv", gap_csv.str());

    Csv summary({"label", "runs", "bound", "within", "fraction_within", "max_gap"});
    const double max_gap = *std::max_element(gaps.gaps.begin(), gaps.gaps.end());
    summary.cell(cfg.label).cell(run.runs).cell(gaps.bound).cell(gaps.within).cell(gaps.fraction_within()).cell(max_gap);
    summary.end_row();
    write_text(fs::path(run.out_dir) / "simulate_summary.csv", summary.str());

    if (run.plot) {
        const GuidedPaths p = sim.trajectories(run.seed, 0);
        const std::string title = cfg.label + ": guided object chasing its moving guide (run 0)";
        const std::string svg = render_svg(title, plot_axes_x(cfg), plot_axes_y(cfg),
                                           {{"object", "#1f4fd6", planar_path(cfg, p.object)},
                                            {"guide", "#d62728", planar_path(cfg, p.guide)}});
        write_text(fs::path(run.out_dir) / "simulate.svg", svg);
    }

    log << "simulate: " << run.runs << " runs, " << files << " trajectory files, terminal gap < " << sci(gaps.bound)
        << " in " << gaps.within << "/" << run.runs << " runs (max gap " << sci(max_gap) << ")\n";
    return kExitOk;
}

int cmd_filter(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    const RunConfig run = effective_run(cfg, opts);
    const ScenarioModels models = build_models(cfg);
    const JointStateSpace& joint = models.joint;
    ensure_directory(run.out_dir);

    const FilterStats stats = filter_monte_carlo(cfg, models, run.seed, run.runs, noise_of(opts));
    const std::vector<std::string> comps = component_names(cfg);
    const std::vector<std::string> blocks = block_prefixes(joint);

    std::vector<std::string> header{"k"};
    for (const char* kind : {"est", "var", "err"})
        for (const std::string& b : blocks)
            for (const std::string& c : comps) header.push_back(b + "_" + c + "_" + kind);
    header.push_back("nees");
    Csv csv(header);
    for (const GaussianBelief& b : stats.first_beliefs) {
        const Vec& truth = stats.first_run.truth.stacked[b.k];
        csv.cell(b.k);
        for (Eigen::Index i = 0; i < b.mean.size(); ++i) csv.cell(b.mean(i));
        for (Eigen::Index i = 0; i < b.mean.size(); ++i) csv.cell(b.cov(i, i));
        for (Eigen::Index i = 0; i < b.mean.size(); ++i) csv.cell(truth(i) - b.mean(i));
        csv.cell(opts.zero_noise ? 0.0 : step_nees(joint, truth, b));
        csv.end_row();
    }
    write_text(fs::path(run.out_dir) / "filter.csv", csv.str());

    std::vector<std::string> sheader{"k", "mean_nees", "nees_lo", "nees_hi", "in_band", "x_pos_rmse", "d_pos_rmse"};
    if (joint.has_destination) sheader.push_back("dN_pos_rmse");
    Csv summary(sheader);
    int in_band = 0;
    for (int k = 1; k <= joint.horizon; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        const ChiSquareBand& band = stats.step_band[i];
        const bool ok = band.contains(stats.mean_nees[i]);
        in_band += ok ? 1 : 0;
        summary.cell(k).cell(stats.mean_nees[i]).cell(band.lo).cell(band.hi).cell(ok ? 1 : 0);
        summary.cell(std::sqrt(stats.object_pos_mse[i])).cell(std::sqrt(stats.guide_pos_mse[i]));
        if (joint.has_destination) summary.cell(std::sqrt(stats.destination_pos_mse[i]));
        summary.end_row();
    }
    write_text(fs::path(run.out_dir) / "filter_summary.csv", summary.str());

    if (run.plot) {
        Trajectory est_x, est_d;
        est_x.states.push_back(joint.init_mean.segment(joint.offset(Block::Object), joint.block_dim));
        est_d.states.push_back(joint.init_mean.segment(joint.offset(Block::Guide), joint.block_dim));
        for (const GaussianBelief& b : stats.first_beliefs) {
            est_x.states.push_back(extract_object(b, joint).mean);
            est_d.states.push_back(extract_guide(b, joint).mean);
        }
        const std::string svg =
            render_svg(cfg.label + ": truth and filtered estimates (run 0)", plot_axes_x(cfg), plot_axes_y(cfg),
                       {{"object", "#1f4fd6", planar_path(cfg, stats.first_run.truth.object)},
                        {"object estimate", "#7fa3ff", planar_path(cfg, est_x)},
                        {"guide", "#d62728", planar_path(cfg, stats.first_run.truth.guide)},
                        {"guide estimate", "#ff9a8f", planar_path(cfg, est_d)}});
        write_text(fs::path(run.out_dir) / "filter.svg", svg);
    }

    const int mid = std::max(1, joint.horizon / 2);
    log << "filter: " << run.runs << " runs, stacked dimension " << stats.dof << ", 95% band for mean NEES ["
        << sci(stats.band.lo) << ", " << sci(stats.band.hi) << "]\n"
        << "filter: mean NEES at k=" << mid << " is " << sci(stats.mean_nees[static_cast<std::size_t>(mid - 1)])
        << "; " << in_band << "/" << joint.horizon << " steps inside the band\n";
    return kExitOk;
}

int cmd_predict(const ScenarioConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    const RunConfig run = effective_run(cfg, opts);
    const ScenarioModels models = build_models(cfg);
    const JointStateSpace& joint = models.joint;
    const PredictionStats stats =
        prediction_monte_carlo(cfg, models, run.seed, run.runs, run.predict_from, run.horizons, noise_of(opts));
    ensure_directory(run.out_dir);

    const std::vector<std::string> comps = component_names(cfg);
    const std::vector<std::string> blocks = block_prefixes(joint);
    std::vector<std::string> header{"n", "k"};
    for (const char* kind : {"pred", "var", "truth"})
        for (const std::string& b : blocks)
            for (const std::string& c : comps) header.push_back(b + "_" + c + "_" + kind);
    Csv csv(header);
    for (std::size_t i = 0; i < stats.horizons.size(); ++i) {
        const GaussianBelief& p = stats.analytic[i];
        const Vec& truth = stats.first_run.truth.stacked[p.k];
        csv.cell(stats.horizons[i]).cell(p.k);
        for (Eigen::Index j = 0; j < p.mean.size(); ++j) csv.cell(p.mean(j));
        for (Eigen::Index j = 0; j < p.mean.size(); ++j) csv.cell(p.cov(j, j));
        for (Eigen::Index j = 0; j < p.mean.size(); ++j) csv.cell(truth(j));
        csv.end_row();
    }
    write_text(fs::path(run.out_dir) / "predict.csv", csv.str());

    const Mat pos = position_selector_for(cfg);
    const auto x0 = joint.offset(Block::Object);
    const auto d = joint.block_dim;
    Csv mc({"n", "k", "runs", "rel_frobenius_error", "analytic_trace", "mc_trace", "x_pos_rmse_analytic",
            "x_pos_rmse_mc"});
    for (std::size_t i = 0; i < stats.horizons.size(); ++i) {
        const Mat& a = stats.analytic[i].cov;
        const Mat& s = stats.sample_mse[i];
        mc.cell(stats.horizons[i]).cell(stats.analytic[i].k).cell(stats.runs).cell(stats.relative_error[i]);
        mc.cell(a.trace()).cell(s.trace());
        mc.cell(std::sqrt((pos * a.block(x0, x0, d, d) * pos.transpose()).trace()));
        mc.cell(std::sqrt((pos * s.block(x0, x0, d, d) * pos.transpose()).trace()));
        mc.end_row();
    }
    write_text(fs::path(run.out_dir) / "predict_mc.csv", mc.str());

    log << "predict: from k=" << stats.from_k << ", " << stats.runs << " runs\n";
    for (std::size_t i = 0; i < stats.horizons.size(); ++i)
        log << "predict: n=" << stats.horizons[i] << " relative Frobenius error of MC MSE vs analytic "
            << sci(stats.relative_error[i]) << "\n";
    return kExitOk;
}

int cmd_verify(const std::optional<ScenarioConfig>& cfg, const CommandOptions& opts, std::ostream& log) {
    RunConfig run = cfg ? effective_run(*cfg, opts) : effective_run(ScenarioConfig{}, opts);
    const auto results = run_verification_suite(run.seed, opts.inject_fault ? Fault::CorruptInducedGain : Fault::None);

    std::ostringstream report;
    report << "cmguide verification report, seed " << run.seed
           << (opts.inject_fault ? ", injected fault: corrupted induced gain" : "") << "\n";
    int failed = 0;
    for (const CheckResult& r : results) {
        failed += r.passed ? 0 : 1;
        report << (r.passed ? "PASS " : "FAIL ") << r.name << " | cases " << r.cases << " | worst " << sci(r.worst)
               << " | tolerance " << sci(r.tolerance);
        if (!r.detail.empty()) report << " | " << r.detail;
        report << "\n";
    }
    report << (failed == 0 ? "ALL CHECKS PASSED" : std::to_string(failed) + " CHECK(S) FAILED") << "\n";

    ensure_directory(run.out_dir);
    write_text(fs::path(run.out_dir) / "verify_report.txt", report.str());
    log << report.str();
    return failed == 0 ? kExitOk : kExitVerification;
}

}  // namespace cmguide::app
