#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cmguide/guided_model.hpp"
#include "cmguide/linalg.hpp"
#include "cmguide/random.hpp"

namespace cmguide {

/// z^x_k = H^x x_k + v^x_k and z^d_k = H^d d_k + v^d_k, with white, mutually
/// uncorrelated noises. Time-invariant.
struct MeasurementModel {
    Mat object_h;
    Mat guide_h;
    Mat object_r;
    Mat guide_r;

    void validate(int block_dim) const;

    /// Block H_k of the stacked state for the given subset of measured targets.
    Mat stacked_h(const JointStateSpace& joint, bool object, bool guide) const;
    Mat stacked_r(bool object, bool guide) const;
};

/// Position-only selector [1 0 0 0; 0 0 1 0] for a planar NCV state, [1 0] for a single axis.
Mat position_selector(int block_dim);

/// One time step's measurements; either target may be missing.
struct Measurement {
    std::optional<Vec> object;
    std::optional<Vec> guide;
};

/// Entry k-1 holds the measurements at time k, k in [1, N].
using MeasurementSeries = std::vector<Measurement>;

MeasurementSeries simulate_measurements(const Trajectory& object, const Trajectory& guide, const MeasurementModel& m,
                                        std::uint64_t seed, Noise noise = Noise::Sampled);
MeasurementSeries simulate_measurements(const Trajectory& object, const Trajectory& guide, const MeasurementModel& m,
                                        Rng& rng, Noise noise = Noise::Sampled);

/// Mean and covariance of the stacked state at time k.
struct GaussianBelief {
    int k = 0;
    Vec mean;
    Mat cov;
};

/// The model's own prior at k = 0.
GaussianBelief prior_belief(const JointStateSpace& joint);

/// s_{k|k-1} and Sigma_{k|k-1} from the belief at k-1.
GaussianBelief predict_step(const GaussianBelief& prior, const JointStateSpace& joint);

/// MMSE update of a predicted belief with the measurements at its time index.
/// Throws NumericError if the innovation covariance is singular.
GaussianBelief update_step(const GaussianBelief& predicted, const Measurement& z, const JointStateSpace& joint,
                           const MeasurementModel& m);

GaussianBelief kf_step(const GaussianBelief& prior, const Measurement& z, const JointStateSpace& joint,
                       const MeasurementModel& m);

/// Beliefs for k = 1..N given measurements z_1..z_N (or a shorter prefix).
std::vector<GaussianBelief> run_filter(const JointStateSpace& joint, const MeasurementModel& m,
                                       const MeasurementSeries& measurements, const GaussianBelief& init);

/// n-step prediction s_{k+n|k}, Sigma_{k+n|k}. Requires n >= 0 and k + n <= N - 1.
GaussianBelief predict_n(const GaussianBelief& belief, int n, const JointStateSpace& joint);

struct BlockEstimate {
    Vec mean;
    Mat cov;
};

BlockEstimate extract_block(const GaussianBelief& belief, const JointStateSpace& joint, Block block);
inline BlockEstimate extract_object(const GaussianBelief& b, const JointStateSpace& j) {
    return extract_block(b, j, Block::Object);
}
inline BlockEstimate extract_guide(const GaussianBelief& b, const JointStateSpace& j) {
    return extract_block(b, j, Block::Guide);
}
inline BlockEstimate extract_destination(const GaussianBelief& b, const JointStateSpace& j) {
    return extract_block(b, j, Block::Destination);
}

/// (s - s_hat)' Sigma^{-1} (s - s_hat)
double nees(const Vec& truth, const GaussianBelief& belief);
double nees(const Vec& truth, const Vec& mean, const Mat& cov);

}  // namespace cmguide
