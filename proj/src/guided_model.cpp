#include "cmguide/guided_model.hpp"

#include <string>
#include <utility>

#include "cmguide/errors.hpp"

namespace cmguide {

namespace {

const Mat& interior_at(const std::vector<Mat>& seq, int k, int horizon) {
    if (k < 1 || k > horizon - 1)
        throw IndexError("ObjectEvolution: k=" + std::to_string(k) + " outside [1,N-1]");
    return seq[static_cast<std::size_t>(k - 1)];
}

const Mat& step_at(const std::vector<Mat>& seq, int k, int horizon) {
    if (k < 1 || k > horizon) throw IndexError("JointStateSpace: k=" + std::to_string(k) + " outside [1,N]");
    return seq[static_cast<std::size_t>(k - 1)];
}

void check_object_inputs(const Mat& F, const Mat& Q, int guide_dim, const Mat& terminal_cov,
                         const GaussianPrior& object_init) {
    if (F.rows() != F.cols() || Q.rows() != F.rows() || Q.cols() != F.cols())
        throw ConfigError("guided model: F and Q must be square of equal size");
    if (F.rows() != guide_dim) throw ConfigError("guided model: object and guide dimensions must match");
    if (terminal_cov.rows() != guide_dim || terminal_cov.cols() != guide_dim)
        throw ConfigError("guided model: terminal covariance dimension mismatch");
    if (object_init.mean.size() != guide_dim || object_init.cov.rows() != guide_dim ||
        object_init.cov.cols() != guide_dim)
        throw ConfigError("guided model: object initial state dimension mismatch");
    require_spd(terminal_cov, "guided model terminal covariance");
    require_spd(object_init.cov, "guided model object initial covariance");
}

}  // namespace

const Mat& ObjectEvolution::prev_at(int k) const { return interior_at(prev, k, horizon); }
const Mat& ObjectEvolution::guide_at(int k) const { return interior_at(guide, k, horizon); }
const Mat& ObjectEvolution::noise_at(int k) const { return interior_at(noise, k, horizon); }

ObjectEvolution object_evolution_from(const CmlParams& induced) {
    return ObjectEvolution{induced.horizon, induced.evo_prev, induced.evo_dest, induced.evo_noise};
}

const Mat& JointStateSpace::transition(int k) const { return step_at(transitions, k, horizon); }
const Mat& JointStateSpace::noise_cov(int k) const { return step_at(noise_covs, k, horizon); }

int JointStateSpace::offset(Block b) const {
    switch (b) {
        case Block::Object: return 0;
        case Block::Guide: return block_dim;
        case Block::Destination:
            if (!has_destination) throw ConfigError("JointStateSpace: model has no destination block");
            return 2 * block_dim;
    }
    throw ConfigError("JointStateSpace: unknown block");
}

Mat JointStateSpace::selector(Block b) const {
    Mat s = Mat::Zero(block_dim, dim());
    s.block(0, offset(b), block_dim, block_dim).setIdentity();
    return s;
}

GuidedSystem build_markov_guided(const Mat& F, const Mat& Q, const MarkovModel& guide, const Mat& terminal_cov,
                                 const GaussianPrior& object_init) {
    check_object_inputs(F, Q, guide.dim(), terminal_cov, object_init);
    const CmlParams induced = derive_induced_params_stationary(F, Q, guide.horizon());
    return GuidedSystem{object_evolution_from(induced), guide, terminal_cov, object_init};
}

DestinationGuidedSystem build_cml_guided(const Mat& F, const Mat& Q, const CmlParams& guide_cml,
                                         const Mat& terminal_cov, const GaussianPrior& object_init) {
    guide_cml.validate();
    check_object_inputs(F, Q, guide_cml.dim(), terminal_cov, object_init);
    const CmlParams induced = derive_induced_params_stationary(F, Q, guide_cml.horizon);
    return DestinationGuidedSystem{object_evolution_from(induced), guide_cml, terminal_cov, object_init};
}

JointStateSpace assemble_joint(const GuidedSystem& sys) {
    const int d = sys.guide.dim();
    const int n = sys.guide.horizon();
    if (sys.object.horizon != n) throw ConfigError("assemble_joint: object and guide horizons differ");

    JointStateSpace js;
    js.block_dim = d;
    js.horizon = n;
    js.has_destination = false;
    js.transitions.reserve(static_cast<std::size_t>(n));
    js.noise_covs.reserve(static_cast<std::size_t>(n));

    for (int k = 1; k <= n - 1; ++k) {
        Mat t = Mat::Zero(2 * d, 2 * d);
        t.topLeftCorner(d, d) = sys.object.prev_at(k);
        t.topRightCorner(d, d) = sys.object.guide_at(k);
        t.bottomRightCorner(d, d) = sys.guide.transition(k);
        js.transitions.push_back(std::move(t));
        js.noise_covs.push_back(block_diag({sys.object.noise_at(k), sys.guide.noise_cov(k)}));
    }

    // Terminal step: x_N = G^d_{N,N-1} d_{N-1} + w_N + e_N, d_N = G^d_{N,N-1} d_{N-1} + w_N.
    const Mat& gd = sys.guide.transition(n);
    const Mat& w = sys.guide.noise_cov(n);
    Mat t = Mat::Zero(2 * d, 2 * d);
    t.topRightCorner(d, d) = gd;
    t.bottomRightCorner(d, d) = gd;
    Mat q(2 * d, 2 * d);
    q << sys.terminal_cov + w, w, w, w;
    js.transitions.push_back(std::move(t));
    js.noise_covs.push_back(symmetrize(q));

    js.init_mean.resize(2 * d);
    js.init_mean << sys.object_init.mean, sys.guide.init_mean();
    js.init_cov = block_diag({sys.object_init.cov, sys.guide.init_cov()});
    return js;
}

JointStateSpace assemble_joint_destination(const DestinationGuidedSystem& sys) {
    const CmlParams& g = sys.guide_cml;
    const int d = g.dim();
    const int n = g.horizon;
    if (sys.object.horizon != n) throw ConfigError("assemble_joint_destination: object and guide horizons differ");

    JointStateSpace js;
    js.block_dim = d;
    js.horizon = n;
    js.has_destination = true;
    js.transitions.reserve(static_cast<std::size_t>(n));
    js.noise_covs.reserve(static_cast<std::size_t>(n));

    const Mat eye = Mat::Identity(d, d);
    const Mat zero = Mat::Zero(d, d);
    for (int k = 1; k <= n - 1; ++k) {
        Mat t = Mat::Zero(3 * d, 3 * d);
        t.block(0, 0, d, d) = sys.object.prev_at(k);
        t.block(0, d, d, d) = sys.object.guide_at(k);
        t.block(d, d, d, d) = g.prev(k);
        t.block(d, 2 * d, d, d) = g.dest(k);
        t.block(2 * d, 2 * d, d, d) = eye;
        js.transitions.push_back(std::move(t));
        js.noise_covs.push_back(block_diag({sys.object.noise_at(k), g.noise(k), zero}));
    }

    // Terminal step: the guide lands on its destination and x_N = d_N + e_N.
    Mat t = Mat::Zero(3 * d, 3 * d);
    t.block(0, 2 * d, d, d) = eye;
    t.block(d, 2 * d, d, d) = eye;
    t.block(2 * d, 2 * d, d, d) = eye;
    js.transitions.push_back(std::move(t));
    js.noise_covs.push_back(block_diag({sys.terminal_cov, zero, zero}));

    // d_0 = mu_0 + e_0, d_N = mu_N + G_{N,0} e_0 + e_N.
    const Mat& g0 = g.boundary.initial_cov;
    const Mat& gn0 = g.boundary.final_from_initial;
    js.init_mean.resize(3 * d);
    js.init_mean << sys.object_init.mean, g.mean_initial, g.mean_final;
    js.init_cov = Mat::Zero(3 * d, 3 * d);
    js.init_cov.block(0, 0, d, d) = sys.object_init.cov;
    js.init_cov.block(d, d, d, d) = g0;
    js.init_cov.block(2 * d, d, d, d) = gn0 * g0;
    js.init_cov.block(d, 2 * d, d, d) = (gn0 * g0).transpose();
    js.init_cov.block(2 * d, 2 * d, d, d) = symmetrize(gn0 * g0 * gn0.transpose() + g.boundary.final_cov);
    return js;
}

JointSampler::JointSampler(JointStateSpace joint)
    : joint_(std::move(joint)), init_factor_(covariance_factor(joint_.init_cov, "stacked initial covariance", 0)) {
    factors_.reserve(static_cast<std::size_t>(joint_.horizon));
    for (int k = 1; k <= joint_.horizon; ++k)
        factors_.push_back(covariance_factor(joint_.noise_cov(k), "stacked noise covariance", k));
}

Trajectory JointSampler::sample(Rng& rng, Noise noise) const {
    const JointStateSpace& js = joint_;
    const bool sampled = noise == Noise::Sampled;
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(js.horizon + 1));
    Vec s = js.init_mean;
    if (sampled) s += rng.correlated(init_factor_);
    traj.states.push_back(s);
    for (int k = 1; k <= js.horizon; ++k) {
        s = js.transition(k) * s;
        if (sampled) s += rng.correlated(factors_[static_cast<std::size_t>(k - 1)]);
        traj.states.push_back(s);
    }
    return traj;
}

GuidedPaths split_paths(const JointStateSpace& joint, Trajectory stacked) {
    GuidedPaths paths;
    const int d = joint.block_dim;
    paths.object.states.reserve(stacked.states.size());
    paths.guide.states.reserve(stacked.states.size());
    for (const Vec& s : stacked.states) {
        paths.object.states.push_back(s.segment(joint.offset(Block::Object), d));
        paths.guide.states.push_back(s.segment(joint.offset(Block::Guide), d));
    }
    paths.stacked = std::move(stacked);
    return paths;
}

GuidedPaths sample_guided(const JointStateSpace& joint, std::uint64_t seed, Noise noise) {
    const JointSampler sampler(joint);
    Rng rng(seed);
    return split_paths(joint, sampler.sample(rng, noise));
}

}  // namespace cmguide
