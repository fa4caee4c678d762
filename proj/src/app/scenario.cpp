#include "cmguide/app/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "cmguide/errors.hpp"

namespace cmguide::app {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(section + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError(section + ": unknown field '" + key + "'");
    }
}

const json& required(const json& obj, const std::string& section, const char* key) {
    if (!obj.contains(key)) throw ConfigError(section + ": missing field '" + key + "'");
    return obj.at(key);
}

double read_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + ": expected a number");
    return v.get<double>();
}

int read_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) throw ConfigError(what + ": expected an integer");
    return v.get<int>();
}

// A number s means s I, a flat array the diagonal, a nested array the full matrix.
Mat read_matrix(const json& v, int dim, const std::string& what) {
    if (v.is_number()) return v.get<double>() * Mat::Identity(dim, dim);
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        throw ConfigError(what + ": expected a number or " + std::to_string(dim) + " entries");
    Mat m = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (row.is_number()) {
            m(i, i) = row.get<double>();
            continue;
        }
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ConfigError(what + ": row " + std::to_string(i) + " must have " + std::to_string(dim) + " entries");
        for (int j = 0; j < dim; ++j) m(i, j) = read_number(row[static_cast<std::size_t>(j)], what);
    }
    return m;
}

Mat read_square(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty() || !v[0].is_array())
        throw ConfigError(what + ": expected a nested array (square matrix)");
    return read_matrix(v, static_cast<int>(v.size()), what);
}

Vec read_vector(const json& v, int dim, const std::string& what) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
        throw ConfigError(what + ": expected " + std::to_string(dim) + " numbers");
    Vec x(dim);
    for (int i = 0; i < dim; ++i) x(i) = read_number(v[static_cast<std::size_t>(i)], what);
    return x;
}

Mat spd(const json& v, int dim, const std::string& what) {
    Mat m = read_matrix(v, dim, what);
    require_spd(m, what);
    return m;
}

void parse_model(const json& j, ScenarioConfig& cfg) {
    if (j.contains("F")) {
        check_keys(j, "model", {"N", "F", "Q"});
        cfg.horizon = read_int(required(j, "model", "N"), "model.N");
        cfg.F = read_square(required(j, "model", "F"), "model.F");
        cfg.Q = spd(required(j, "model", "Q"), static_cast<int>(cfg.F.rows()), "model.Q");
        if (cfg.horizon < 2) throw ConfigError("model.N must be at least 2");
        return;
    }
    check_keys(j, "model", {"T", "q", "N", "planar"});
    NcvConfig ncv;
    ncv.T = read_number(required(j, "model", "T"), "model.T");
    ncv.q = read_number(required(j, "model", "q"), "model.q");
    ncv.N = read_int(required(j, "model", "N"), "model.N");
    if (j.contains("planar")) {
        if (!j["planar"].is_boolean()) throw ConfigError("model.planar: expected true or false");
        ncv.planar = j["planar"].get<bool>();
    }
    const MarkovModel m = make_ncv_model(ncv);
    cfg.ncv = ncv;
    cfg.horizon = ncv.N;
    cfg.F = m.transition(1);
    cfg.Q = m.noise_cov(1);
}

GaussianPrior parse_prior(const json& j, const std::string& section, int dim) {
    return GaussianPrior{read_vector(required(j, section, "mean"), dim, section + ".mean"),
                         spd(required(j, section, "cov"), dim, section + ".cov")};
}

void parse_measurement(const json& j, ScenarioConfig& cfg) {
    check_keys(j, "measurement", {"observe", "object_r", "guide_r"});
    const int d = cfg.dim();
    std::string observe = cfg.ncv ? "position" : "full";
    if (j.contains("observe")) {
        if (!j["observe"].is_string()) throw ConfigError("measurement.observe: expected a string");
        observe = j["observe"].get<std::string>();
    }
    Mat h;
    if (observe == "position") {
        if (!cfg.ncv) throw ConfigError("measurement.observe: 'position' needs the NCV model section");
        h = position_selector(d);
    } else if (observe == "full") {
        h = Mat::Identity(d, d);
    } else {
        throw ConfigError("measurement.observe: expected 'position' or 'full'");
    }
    const int p = static_cast<int>(h.rows());
    cfg.measurement.object_h = h;
    cfg.measurement.guide_h = h;
    cfg.measurement.object_r = j.contains("object_r") ? spd(j["object_r"], p, "measurement.object_r") : Mat::Identity(p, p);
    cfg.measurement.guide_r = j.contains("guide_r") ? spd(j["guide_r"], p, "measurement.guide_r") : Mat::Identity(p, p);
}

void parse_run(const json& j, RunConfig& run) {
    check_keys(j, "run", {"seed", "runs", "predict_from", "horizons", "out_dir", "max_trajectory_files", "plot"});
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("run.seed: expected a non-negative integer");
        run.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("runs")) run.runs = read_int(j["runs"], "run.runs");
    if (j.contains("predict_from")) run.predict_from = read_int(j["predict_from"], "run.predict_from");
    if (j.contains("horizons")) {
        if (!j["horizons"].is_array() || j["horizons"].empty())
            throw ConfigError("run.horizons: expected a non-empty array of integers");
        run.horizons.clear();
        for (const json& h : j["horizons"]) run.horizons.push_back(read_int(h, "run.horizons"));
    }
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw ConfigError("run.out_dir: expected a string");
        run.out_dir = j["out_dir"].get<std::string>();
    }
    if (j.contains("max_trajectory_files"))
        run.max_trajectory_files = read_int(j["max_trajectory_files"], "run.max_trajectory_files");
    if (j.contains("plot")) {
        if (!j["plot"].is_boolean()) throw ConfigError("run.plot: expected true or false");
        run.plot = j["plot"].get<bool>();
    }
    if (run.runs < 1) throw ConfigError("run.runs must be at least 1");
    if (run.predict_from < 0) throw ConfigError("run.predict_from must be non-negative");
    if (run.max_trajectory_files < 0) throw ConfigError("run.max_trajectory_files must be non-negative");
    for (int h : run.horizons)
        if (h < 0) throw ConfigError("run.horizons must be non-negative");
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
    try {
        check_keys(j, "scenario", {"label", "model", "guide", "object", "measurement", "run"});
        ScenarioConfig cfg;
        if (j.contains("label")) {
            if (!j["label"].is_string()) throw ConfigError("label: expected a string");
            cfg.label = j["label"].get<std::string>();
        }
        parse_model(required(j, "scenario", "model"), cfg);
        const int d = cfg.dim();

        const json& guide = required(j, "scenario", "guide");
        check_keys(guide, "guide", {"mean", "cov", "destination"});
        cfg.guide_init = parse_prior(guide, "guide", d);
        if (guide.contains("destination")) {
            const json& dest = guide["destination"];
            check_keys(dest, "guide.destination", {"mean", "cov", "cross_cov"});
            DestinationConfig dc;
            dc.mean = read_vector(required(dest, "guide.destination", "mean"), d, "guide.destination.mean");
            dc.cov = spd(required(dest, "guide.destination", "cov"), d, "guide.destination.cov");
            dc.cross_cov = dest.contains("cross_cov") ? read_matrix(dest["cross_cov"], d, "guide.destination.cross_cov")
                                                      : Mat::Zero(d, d);
            cfg.destination = dc;
        }

        const json& object = required(j, "scenario", "object");
        check_keys(object, "object", {"mean", "cov", "terminal_cov"});
        cfg.object_init = parse_prior(object, "object", d);
        cfg.terminal_cov = object.contains("terminal_cov") ? spd(object["terminal_cov"], d, "object.terminal_cov")
                                                           : 1e-4 * Mat::Identity(d, d);

        parse_measurement(j.contains("measurement") ? j["measurement"] : json::object(), cfg);
        if (j.contains("run")) parse_run(j["run"], cfg.run);
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

ScenarioModels build_models(const ScenarioConfig& cfg) {
    ScenarioModels m{MarkovModel::time_invariant(cfg.F, cfg.Q, cfg.horizon, cfg.guide_init.mean, cfg.guide_init.cov),
                     std::nullopt, std::nullopt, {}};
    if (cfg.destination) {
        const EndpointDensity ep{cfg.guide_init.mean, cfg.guide_init.cov, cfg.destination->mean, cfg.destination->cov,
                                 cfg.destination->cross_cov};
        const CmlParams guide_cml = set_endpoint_density(derive_induced_params(m.guide), ep);
        m.cml_guided = build_cml_guided(cfg.F, cfg.Q, guide_cml, cfg.terminal_cov, cfg.object_init);
        m.joint = assemble_joint_destination(*m.cml_guided);
    } else {
        m.markov_guided = build_markov_guided(cfg.F, cfg.Q, m.guide, cfg.terminal_cov, cfg.object_init);
        m.joint = assemble_joint(*m.markov_guided);
    }
    return m;
}

std::vector<std::string> component_names(const ScenarioConfig& cfg) {
    if (cfg.ncv && cfg.ncv->planar) return {"pos_x", "vel_x", "pos_y", "vel_y"};
    if (cfg.ncv) return {"pos", "vel"};
    std::vector<std::string> names;
    for (int i = 0; i < cfg.dim(); ++i) names.push_back("s" + std::to_string(i));
    return names;
}

Mat position_selector_for(const ScenarioConfig& cfg) {
    return cfg.ncv ? position_selector(cfg.dim()) : Mat::Identity(cfg.dim(), cfg.dim());
}

}  // namespace cmguide::app
