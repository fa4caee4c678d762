#pragma once

#include <cstdint>
#include <vector>

#include "cmguide/linalg.hpp"
#include "cmguide/random.hpp"

namespace cmguide {

/// Sample path x_0..x_N.
struct Trajectory {
    std::vector<Vec> states;

    int horizon() const { return static_cast<int>(states.size()) - 1; }
    const Vec& operator[](int k) const { return states[static_cast<std::size_t>(k)]; }
    Vec& operator[](int k) { return states[static_cast<std::size_t>(k)]; }
};

/// Linear-Gaussian Markov model over [0, N]:
///   x_k = M_{k,k-1} x_{k-1} + w_k,  k in [1, N],   x_0 ~ N(init_mean, init_cov),
/// with Cov(w_k) = M_k. Steps are stored explicitly even for time-invariant models.
class MarkovModel {
public:
    MarkovModel(std::vector<Mat> transitions, std::vector<Mat> noise_covs, Vec init_mean, Mat init_cov);

    static MarkovModel time_invariant(const Mat& transition, const Mat& noise_cov, int horizon,
                                      Vec init_mean, Mat init_cov);

    int dim() const { return static_cast<int>(init_mean_.size()); }
    int horizon() const { return static_cast<int>(transitions_.size()); }

    /// M_{k,k-1}, k in [1, N].
    const Mat& transition(int k) const;
    /// M_k = Cov(w_k), k in [1, N].
    const Mat& noise_cov(int k) const;

    const Vec& init_mean() const { return init_mean_; }
    const Mat& init_cov() const { return init_cov_; }

private:
    std::vector<Mat> transitions_;
    std::vector<Mat> noise_covs_;
    Vec init_mean_;
    Mat init_cov_;
};

/// Nearly-constant-velocity discretization with white-noise acceleration.
struct NcvConfig {
    double T = 1.0;      ///< sampling period
    double q = 0.005;    ///< acceleration noise power spectral density
    int N = 250;         ///< horizon
    bool planar = true;  ///< [x, vx, y, vy] when true, [x, vx] otherwise
};

/// F_1 = [[1, T], [0, 1]]
Mat ncv_axis_transition(double T);
/// Q_1 = q [[T^3/3, T^2/2], [T^2/2, T]]
Mat ncv_axis_noise(double T, double q);

/// Time-invariant NCV model, transition diag(F_1, F_1) and noise diag(Q_1, Q_1)
/// (single axis when not planar). Throws ConfigError for T <= 0, q <= 0 or N < 2.
MarkovModel make_ncv_model(const NcvConfig& cfg);
MarkovModel make_ncv_model(const NcvConfig& cfg, Vec init_mean, Mat init_cov);

/// M_{N|k} = M_{N,N-1} ... M_{k+1,k}; identity for k = N. Requires 1 <= k <= N.
Mat transition_product(const MarkovModel& model, int k);

/// Transition from time `from` to time `to`, 0 <= from <= to <= N.
Mat transition_between(const MarkovModel& model, int to, int from);

/// C_{N|k} = sum_{n=k}^{N-1} M_{N|n+1} M_{n+1} M_{N|n+1}', i.e. Cov(x_N | x_k).
/// Requires 1 <= k <= N-1.
Mat accumulate_controllability(const MarkovModel& model, int k);

/// M_{N|k} and C_{N|k} for every k in [0, N], built in one backward sweep.
/// controllability[N] is the zero matrix.
struct DestinationAggregates {
    std::vector<Mat> to_final;
    std::vector<Mat> controllability;
};
DestinationAggregates destination_aggregates(const MarkovModel& model);

/// E[x_k] for k in [0, N].
std::vector<Vec> markov_means(const MarkovModel& model);

Trajectory sample_markov(const MarkovModel& model, std::uint64_t seed, Noise noise = Noise::Sampled);
Trajectory sample_markov(const MarkovModel& model, Rng& rng, Noise noise = Noise::Sampled);

}  // namespace cmguide
