#include "cmguide/markov_model.hpp"

#include <string>

#include "cmguide/errors.hpp"

namespace cmguide {

MarkovModel::MarkovModel(std::vector<Mat> transitions, std::vector<Mat> noise_covs, Vec init_mean, Mat init_cov)
    : transitions_(std::move(transitions)),
      noise_covs_(std::move(noise_covs)),
      init_mean_(std::move(init_mean)),
      init_cov_(std::move(init_cov)) {
    const auto n = init_mean_.size();
    if (n == 0) throw ConfigError("MarkovModel: state dimension must be positive");
    if (transitions_.size() < 2) throw ConfigError("MarkovModel: horizon N must be at least 2");
    if (noise_covs_.size() != transitions_.size())
        throw ConfigError("MarkovModel: need exactly N transitions and N noise covariances");
    if (init_cov_.rows() != n || init_cov_.cols() != n) throw ConfigError("MarkovModel: init_cov dimension mismatch");
    require_spd(init_cov_, "MarkovModel init_cov");
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const int k = static_cast<int>(i) + 1;
        if (transitions_[i].rows() != n || transitions_[i].cols() != n)
            throw ConfigError("MarkovModel: transition dimension mismatch at k=" + std::to_string(k));
        if (noise_covs_[i].rows() != n || noise_covs_[i].cols() != n)
            throw ConfigError("MarkovModel: noise covariance dimension mismatch at k=" + std::to_string(k));
        require_spd(noise_covs_[i], "MarkovModel noise covariance", k);
    }
}

MarkovModel MarkovModel::time_invariant(const Mat& transition, const Mat& noise_cov, int horizon, Vec init_mean,
                                        Mat init_cov) {
    if (horizon < 2) throw ConfigError("MarkovModel: horizon N must be at least 2");
    std::vector<Mat> f(static_cast<std::size_t>(horizon), transition);
    std::vector<Mat> q(static_cast<std::size_t>(horizon), noise_cov);
    return MarkovModel(std::move(f), std::move(q), std::move(init_mean), std::move(init_cov));
}

const Mat& MarkovModel::transition(int k) const {
    if (k < 1 || k > horizon()) throw IndexError("MarkovModel::transition: k=" + std::to_string(k) + " outside [1,N]");
    return transitions_[static_cast<std::size_t>(k - 1)];
}

const Mat& MarkovModel::noise_cov(int k) const {
    if (k < 1 || k > horizon()) throw IndexError("MarkovModel::noise_cov: k=" + std::to_string(k) + " outside [1,N]");
    return noise_covs_[static_cast<std::size_t>(k - 1)];
}

Mat ncv_axis_transition(double T) {
    Mat f(2, 2);
    f << 1.0, T, 0.0, 1.0;
    return f;
}

Mat ncv_axis_noise(double T, double q) {
    Mat m(2, 2);
    m << T * T * T / 3.0, T * T / 2.0, T * T / 2.0, T;
    return q * m;
}

namespace {

void validate(const NcvConfig& cfg) {
    if (!(cfg.T > 0.0)) throw ConfigError("NCV model: sampling period T must be positive");
    if (!(cfg.q > 0.0)) throw ConfigError("NCV model: noise density q must be positive");
    if (cfg.N < 2) throw ConfigError("NCV model: horizon N must be at least 2");
}

}  // namespace

MarkovModel make_ncv_model(const NcvConfig& cfg) {
    validate(cfg);
    const int dim = cfg.planar ? 4 : 2;
    return make_ncv_model(cfg, Vec::Zero(dim), Mat::Identity(dim, dim));
}

MarkovModel make_ncv_model(const NcvConfig& cfg, Vec init_mean, Mat init_cov) {
    validate(cfg);
    const Mat f1 = ncv_axis_transition(cfg.T);
    const Mat q1 = ncv_axis_noise(cfg.T, cfg.q);
    const Mat f = cfg.planar ? block_diag({f1, f1}) : f1;
    const Mat q = cfg.planar ? block_diag({q1, q1}) : q1;
    return MarkovModel::time_invariant(f, q, cfg.N, std::move(init_mean), std::move(init_cov));
}

Mat transition_between(const MarkovModel& model, int to, int from) {
    if (from < 0 || to > model.horizon() || from > to)
        throw IndexError("transition_between: need 0 <= from <= to <= N, got from=" + std::to_string(from) +
                         " to=" + std::to_string(to));
    Mat phi = Mat::Identity(model.dim(), model.dim());
    for (int j = from + 1; j <= to; ++j) phi = model.transition(j) * phi;
    return phi;
}

Mat transition_product(const MarkovModel& model, int k) {
    if (k < 1 || k > model.horizon())
        throw IndexError("transition_product: k=" + std::to_string(k) + " outside [1,N]");
    return transition_between(model, model.horizon(), k);
}

DestinationAggregates destination_aggregates(const MarkovModel& model) {
    const int n = model.horizon();
    const int d = model.dim();
    DestinationAggregates agg;
    agg.to_final.assign(static_cast<std::size_t>(n + 1), Mat::Identity(d, d));
    agg.controllability.assign(static_cast<std::size_t>(n + 1), Mat::Zero(d, d));
    for (int k = n - 1; k >= 0; --k) {
        const auto i = static_cast<std::size_t>(k);
        const Mat& next = agg.to_final[i + 1];
        agg.to_final[i] = next * model.transition(k + 1);
        agg.controllability[i] =
            symmetrize(agg.controllability[i + 1] + next * model.noise_cov(k + 1) * next.transpose());
    }
    return agg;
}

Mat accumulate_controllability(const MarkovModel& model, int k) {
    if (k < 1 || k > model.horizon() - 1)
        throw IndexError("accumulate_controllability: k=" + std::to_string(k) + " outside [1,N-1]");
    const int n = model.horizon();
    Mat to_final = Mat::Identity(model.dim(), model.dim());
    Mat c = model.noise_cov(n);
    for (int j = n - 1; j > k; --j) {
        to_final = to_final * model.transition(j + 1);
        c += to_final * model.noise_cov(j) * to_final.transpose();
    }
    return symmetrize(c);
}

std::vector<Vec> markov_means(const MarkovModel& model) {
    std::vector<Vec> means;
    means.reserve(static_cast<std::size_t>(model.horizon() + 1));
    means.push_back(model.init_mean());
    for (int k = 1; k <= model.horizon(); ++k) means.push_back(model.transition(k) * means.back());
    return means;
}

Trajectory sample_markov(const MarkovModel& model, std::uint64_t seed, Noise noise) {
    Rng rng(seed);
    return sample_markov(model, rng, noise);
}

Trajectory sample_markov(const MarkovModel& model, Rng& rng, Noise noise) {
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(model.horizon() + 1));
    Vec x = model.init_mean();
    if (noise == Noise::Sampled) x += rng.correlated(covariance_factor(model.init_cov(), "init_cov", 0));
    traj.states.push_back(x);
    for (int k = 1; k <= model.horizon(); ++k) {
        x = model.transition(k) * x;
        if (noise == Noise::Sampled) x += rng.correlated(covariance_factor(model.noise_cov(k), "noise_cov", k));
        traj.states.push_back(x);
    }
    return traj;
}

}  // namespace cmguide
