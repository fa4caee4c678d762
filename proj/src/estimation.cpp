#include "cmguide/estimation.hpp"

#include <string>

#include "cmguide/errors.hpp"

namespace cmguide {

void MeasurementModel::validate(int block_dim) const {
    if (object_h.cols() != block_dim || guide_h.cols() != block_dim)
        throw ConfigError("MeasurementModel: H columns must match the target state dimension");
    if (object_r.rows() != object_h.rows() || object_r.cols() != object_h.rows())
        throw ConfigError("MeasurementModel: R^x must be square with H^x rows");
    if (guide_r.rows() != guide_h.rows() || guide_r.cols() != guide_h.rows())
        throw ConfigError("MeasurementModel: R^d must be square with H^d rows");
    require_spd(object_r, "MeasurementModel R^x");
    require_spd(guide_r, "MeasurementModel R^d");
}

Mat MeasurementModel::stacked_h(const JointStateSpace& joint, bool object, bool guide) const {
    const auto rows = (object ? object_h.rows() : 0) + (guide ? guide_h.rows() : 0);
    Mat h = Mat::Zero(rows, joint.dim());
    Eigen::Index r = 0;
    if (object) {
        h.block(r, joint.offset(Block::Object), object_h.rows(), object_h.cols()) = object_h;
        r += object_h.rows();
    }
    if (guide) h.block(r, joint.offset(Block::Guide), guide_h.rows(), guide_h.cols()) = guide_h;
    return h;
}

Mat MeasurementModel::stacked_r(bool object, bool guide) const {
    if (object && guide) return block_diag({object_r, guide_r});
    if (object) return object_r;
    if (guide) return guide_r;
    return Mat(0, 0);
}

Mat position_selector(int block_dim) {
    if (block_dim != 2 && block_dim != 4)
        throw ConfigError("position_selector: expects an NCV state of dimension 2 or 4");
    Mat h = Mat::Zero(block_dim / 2, block_dim);
    for (int axis = 0; axis < block_dim / 2; ++axis) h(axis, 2 * axis) = 1.0;
    return h;
}

MeasurementSeries simulate_measurements(const Trajectory& object, const Trajectory& guide, const MeasurementModel& m,
                                        std::uint64_t seed, Noise noise) {
    Rng rng(seed);
    return simulate_measurements(object, guide, m, rng, noise);
}

MeasurementSeries simulate_measurements(const Trajectory& object, const Trajectory& guide, const MeasurementModel& m,
                                        Rng& rng, Noise noise) {
    if (object.horizon() != guide.horizon() || object.horizon() < 1)
        throw ConfigError("simulate_measurements: object and guide trajectories must share a horizon");
    m.validate(static_cast<int>(object[0].size()));
    const Mat lx = covariance_factor(m.object_r, "R^x");
    const Mat ld = covariance_factor(m.guide_r, "R^d");
    MeasurementSeries out;
    out.reserve(static_cast<std::size_t>(object.horizon()));
    for (int k = 1; k <= object.horizon(); ++k) {
        Measurement z;
        z.object = m.object_h * object[k];
        z.guide = m.guide_h * guide[k];
        if (noise == Noise::Sampled) {
            *z.object += rng.correlated(lx);
            *z.guide += rng.correlated(ld);
        }
        out.push_back(std::move(z));
    }
    return out;
}

GaussianBelief prior_belief(const JointStateSpace& joint) { return GaussianBelief{0, joint.init_mean, joint.init_cov}; }

GaussianBelief predict_step(const GaussianBelief& prior, const JointStateSpace& joint) {
    const int k = prior.k + 1;
    const Mat& t = joint.transition(k);
    return GaussianBelief{k, t * prior.mean, symmetrize(t * prior.cov * t.transpose() + joint.noise_cov(k))};
}

GaussianBelief update_step(const GaussianBelief& predicted, const Measurement& z, const JointStateSpace& joint,
                           const MeasurementModel& m) {
    const bool has_x = z.object.has_value();
    const bool has_d = z.guide.has_value();
    if (!has_x && !has_d) return predicted;

    if ((has_x && z.object->size() != m.object_h.rows()) || (has_d && z.guide->size() != m.guide_h.rows()))
        throw ConfigError("update_step: measurement dimension mismatch");
    const Mat h = m.stacked_h(joint, has_x, has_d);
    Vec zk(h.rows());
    if (has_x && has_d)
        zk << *z.object, *z.guide;
    else
        zk = has_x ? *z.object : *z.guide;

    const Mat c_sz = predicted.cov * h.transpose();
    const Mat c_z = symmetrize(h * c_sz + m.stacked_r(has_x, has_d));
    Eigen::LLT<Mat> llt(c_z);
    if (llt.info() != Eigen::Success) throw NumericError("innovation covariance C_z is singular", predicted.k);

    GaussianBelief post;
    post.k = predicted.k;
    post.mean = predicted.mean + c_sz * llt.solve(zk - h * predicted.mean);
    post.cov = symmetrize(predicted.cov - c_sz * llt.solve(c_sz.transpose()));
    return post;
}

GaussianBelief kf_step(const GaussianBelief& prior, const Measurement& z, const JointStateSpace& joint,
                       const MeasurementModel& m) {
    return update_step(predict_step(prior, joint), z, joint, m);
}

std::vector<GaussianBelief> run_filter(const JointStateSpace& joint, const MeasurementModel& m,
                                       const MeasurementSeries& measurements, const GaussianBelief& init) {
    if (init.k != 0) throw IndexError("run_filter: initial belief must be at k=0");
    if (static_cast<int>(measurements.size()) > joint.horizon)
        throw IndexError("run_filter: more measurements than steps in the horizon");
    m.validate(joint.block_dim);
    std::vector<GaussianBelief> beliefs;
    beliefs.reserve(measurements.size());
    GaussianBelief b = init;
    for (const Measurement& z : measurements) {
        b = kf_step(b, z, joint, m);
        beliefs.push_back(b);
    }
    return beliefs;
}

GaussianBelief predict_n(const GaussianBelief& belief, int n, const JointStateSpace& joint) {
    if (n < 0) throw IndexError("predict_n: n must be non-negative");
    if (belief.k < 0 || belief.k + n > joint.horizon - 1)
        throw IndexError("predict_n: k+n=" + std::to_string(belief.k + n) + " beyond N-1=" +
                         std::to_string(joint.horizon - 1));
    if (n == 0) return belief;

    // tail = G^s_{k+n|i+1}; C_{k+n|k} = sum_i tail G^s_{i+1} tail'.
    const int target = belief.k + n;
    Mat tail = Mat::Identity(joint.dim(), joint.dim());
    Mat c = Mat::Zero(joint.dim(), joint.dim());
    for (int i = target - 1; i >= belief.k; --i) {
        c += tail * joint.noise_cov(i + 1) * tail.transpose();
        tail = tail * joint.transition(i + 1);
    }
    return GaussianBelief{target, tail * belief.mean, symmetrize(c + tail * belief.cov * tail.transpose())};
}

BlockEstimate extract_block(const GaussianBelief& belief, const JointStateSpace& joint, Block block) {
    if (belief.mean.size() != joint.dim() || belief.cov.rows() != joint.dim())
        throw ConfigError("extract_block: belief dimension does not match the joint model");
    const int off = joint.offset(block);
    const int d = joint.block_dim;
    return BlockEstimate{belief.mean.segment(off, d), belief.cov.block(off, off, d, d)};
}

double nees(const Vec& truth, const GaussianBelief& belief) { return nees(truth, belief.mean, belief.cov); }

double nees(const Vec& truth, const Vec& mean, const Mat& cov) {
    if (truth.size() != mean.size()) throw ConfigError("nees: dimension mismatch");
    const Vec err = truth - mean;
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericError("nees: covariance is singular");
    return err.dot(llt.solve(err));
}

}  // namespace cmguide
