#pragma once

#include <vector>

#include "cmguide/cml_model.hpp"
#include "cmguide/estimation.hpp"
#include "cmguide/guided_model.hpp"
#include "cmguide/linalg.hpp"
#include "cmguide/markov_model.hpp"

namespace cmguide {

// Brute-force ground truth. Everything here builds the full dense joint law of a
// whole sequence from its noise representation and conditions it directly. None
// of it shares code paths with the recursive algorithms it is used to check.

/// Largest stacked dimension the dense oracle accepts.
inline constexpr int kOracleMaxDim = 10000;

enum class Segment { State, Measurement };

struct JointGaussian {
    struct Range {
        Segment kind;
        int time;
        int offset;
        int size;
    };

    Vec mean;
    Mat cov;
    std::vector<Range> ranges;

    /// Coordinates of (kind, time), optionally a sub-block [first, first + count).
    std::vector<int> indices(Segment kind, int time, int first = 0, int count = -1) const;
};

std::vector<int> concat(std::initializer_list<std::vector<int>> parts);

Mat submatrix(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols);
Vec subvector(const Vec& v, const std::vector<int>& idx);

/// Joint law of (x_0..x_N) of a Markov model.
JointGaussian joint_covariance(const MarkovModel& model);
/// Joint law of (s_0..s_N) of a stacked guided model.
JointGaussian joint_covariance(const JointStateSpace& joint);
/// Joint law of (x_0..x_N) implied by CM_L parameters, solving the model
/// equations as one linear system in the noises (no sampling order involved).
JointGaussian joint_covariance(const CmlParams& params);

/// Joint law of ([x_k; d_k], k = 0..N) written from the guided model's own
/// equations (guide recursion, object recursion, x_N = d_N + e_N), independent
/// of the stacked assembly.
JointGaussian guided_joint_covariance(const GuidedSystem& sys);
JointGaussian guided_joint_covariance(const DestinationGuidedSystem& sys);

/// Joint law of (s_0..s_N, z_1..z_N) with both targets measured at every step.
JointGaussian joint_with_measurements(const JointStateSpace& joint, const MeasurementModel& m);

/// p(target | given) = N(target_mean + weights (g - given_mean), cov).
struct Conditional {
    Mat weights;
    Vec target_mean;
    Vec given_mean;
    Mat cov;

    Vec mean_given(const Vec& given_values) const { return target_mean + weights * (given_values - given_mean); }
};

/// Throws NumericError when the given block is singular, ConfigError when index sets overlap.
Conditional gaussian_condition(const JointGaussian& jg, const std::vector<int>& target, const std::vector<int>& given);

}  // namespace cmguide
