#pragma once

#include <cstdint>
#include <vector>

#include "cmguide/cml_model.hpp"
#include "cmguide/linalg.hpp"
#include "cmguide/markov_model.hpp"
#include "cmguide/random.hpp"

namespace cmguide {

/// Interior dynamics of the guided object,
///   x_k = G^x_{k,k-1} x_{k-1} + G^{xd}_{k,k-1} d_{k-1} + e_k,  k in [1, N-1].
struct ObjectEvolution {
    int horizon = 0;
    std::vector<Mat> prev;   ///< G^x_{k,k-1}
    std::vector<Mat> guide;  ///< G^{xd}_{k,k-1}
    std::vector<Mat> noise;  ///< Cov(e_k)

    int dim() const { return prev.empty() ? 0 : static_cast<int>(prev.front().rows()); }
    const Mat& prev_at(int k) const;
    const Mat& guide_at(int k) const;
    const Mat& noise_at(int k) const;
};

/// Object evolution that treats the guide value at k-1 as the destination:
/// G^x = G_{k,k-1}, G^{xd} = G_{k,N}, Cov(e_k) = G_k of the given CM_L law.
ObjectEvolution object_evolution_from(const CmlParams& induced);

struct GaussianPrior {
    Vec mean;
    Mat cov;
};

/// Object chasing a guide that moves as a Markov sequence; x_N = d_N + e_N.
struct GuidedSystem {
    ObjectEvolution object;
    MarkovModel guide;
    Mat terminal_cov;  ///< Cov(e_N)
    GaussianPrior object_init;
};

/// Object chasing a guide that itself follows a CM_L law towards d_N.
struct DestinationGuidedSystem {
    ObjectEvolution object;
    CmlParams guide_cml;
    Mat terminal_cov;
    GaussianPrior object_init;
};

enum class Block { Object, Guide, Destination };

/// Stacked Markov model s_k = G^s_{k,k-1} s_{k-1} + e^s_k over [x_k; d_k] or [x_k; d_k; d_N].
/// Noise covariances are only PSD in general (the destination row carries no noise).
struct JointStateSpace {
    int block_dim = 0;
    int horizon = 0;
    bool has_destination = false;
    std::vector<Mat> transitions;  ///< G^s_{k,k-1}, stored at k-1
    std::vector<Mat> noise_covs;   ///< G^s_k
    Vec init_mean;
    Mat init_cov;

    int dim() const { return static_cast<int>(init_mean.size()); }
    int blocks() const { return has_destination ? 3 : 2; }
    const Mat& transition(int k) const;
    const Mat& noise_cov(int k) const;
    int offset(Block b) const;
    /// [0 .. I .. 0] picking one block out of the stacked state.
    Mat selector(Block b) const;
};

/// Object parameters from the stationary induced formulas for (F, Q) over the guide's horizon.
/// Throws ConfigError on dimension mismatches.
GuidedSystem build_markov_guided(const Mat& F, const Mat& Q, const MarkovModel& guide, const Mat& terminal_cov,
                                 const GaussianPrior& object_init);

DestinationGuidedSystem build_cml_guided(const Mat& F, const Mat& Q, const CmlParams& guide_cml,
                                         const Mat& terminal_cov, const GaussianPrior& object_init);

/// Stacks object and guide. Step N realizes x_N = d_N + e_N exactly with
/// d_N = G^d_{N,N-1} d_{N-1} + w_N, so only that step has cross-correlated noise.
JointStateSpace assemble_joint(const GuidedSystem& sys);

/// Stacks [x_k; d_k; d_N]; the last block row is identity with zero noise.
JointStateSpace assemble_joint_destination(const DestinationGuidedSystem& sys);

/// Samples the stacked model with noise factors computed once.
class JointSampler {
public:
    explicit JointSampler(JointStateSpace joint);

    /// Stacked states s_0..s_N.
    Trajectory sample(Rng& rng, Noise noise = Noise::Sampled) const;

    const JointStateSpace& model() const { return joint_; }

private:
    JointStateSpace joint_;
    Mat init_factor_;
    std::vector<Mat> factors_;
};

struct GuidedPaths {
    Trajectory object;
    Trajectory guide;
    Trajectory stacked;
};

/// Splits stacked states into the object and guide paths.
GuidedPaths split_paths(const JointStateSpace& joint, Trajectory stacked);

GuidedPaths sample_guided(const JointStateSpace& joint, std::uint64_t seed, Noise noise = Noise::Sampled);

}  // namespace cmguide
