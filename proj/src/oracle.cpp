#include "cmguide/oracle.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "cmguide/errors.hpp"

namespace cmguide {

namespace {

void check_size(long total) {
    if (total > kOracleMaxDim)
        throw ResourceError("oracle: joint dimension " + std::to_string(total) + " exceeds " +
                            std::to_string(kOracleMaxDim));
}

std::vector<JointGaussian::Range> state_ranges(int horizon, int dim) {
    std::vector<JointGaussian::Range> r;
    for (int k = 0; k <= horizon; ++k) r.push_back({Segment::State, k, k * dim, dim});
    return r;
}

// Generic linear-Gaussian chain s_k = A_k s_{k-1} + noise_k: states = T * noises,
// T(k, j) = A_k ... A_{j+1}, noise 0 being the initial deviation.
template <typename TransitionFn, typename NoiseFn>
JointGaussian chain_joint(int horizon, int dim, const Vec& init_mean, const Mat& init_cov, TransitionFn transition,
                          NoiseFn noise) {
    const int total = (horizon + 1) * dim;
    check_size(total);
    Mat t = Mat::Zero(total, total);
    Mat w = Mat::Zero(total, total);
    w.block(0, 0, dim, dim) = init_cov;
    for (int k = 1; k <= horizon; ++k) w.block(k * dim, k * dim, dim, dim) = noise(k);
    for (int j = 0; j <= horizon; ++j) {
        Mat phi = Mat::Identity(dim, dim);
        t.block(j * dim, j * dim, dim, dim) = phi;
        for (int k = j + 1; k <= horizon; ++k) {
            phi = transition(k) * phi;
            t.block(k * dim, j * dim, dim, dim) = phi;
        }
    }
    Vec init = Vec::Zero(total);
    init.head(dim) = init_mean;

    JointGaussian jg;
    jg.mean = t * init;
    jg.cov = symmetrize(t * w * t.transpose());
    jg.ranges = state_ranges(horizon, dim);
    return jg;
}

// Solves A v = e + c for v with independent block noises e ~ N(0, W).
JointGaussian solve_linear_gaussian(const Mat& a, const Mat& w, const Vec& c) {
    Eigen::PartialPivLU<Mat> lu(a);
    const Mat a_inv = lu.inverse();
    JointGaussian jg;
    jg.mean = a_inv * c;
    jg.cov = symmetrize(a_inv * w * a_inv.transpose());
    return jg;
}

// Variables laid out as [x_k; d_k] per time. Each equation row block is owned by
// one variable: row(x, k) holds the equation defining x_k, row(d, k) the one for d_k.
struct GuidedLayout {
    int d;
    int object(int k) const { return 2 * k * d; }
    int guide(int k) const { return (2 * k + 1) * d; }
};

}  // namespace

std::vector<int> JointGaussian::indices(Segment kind, int time, int first, int count) const {
    for (const Range& r : ranges) {
        if (r.kind != kind || r.time != time) continue;
        const int n = count < 0 ? r.size - first : count;
        if (first < 0 || first + n > r.size) throw IndexError("JointGaussian::indices: sub-block out of range");
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = r.offset + first + i;
        return idx;
    }
    throw IndexError("JointGaussian::indices: no segment at time " + std::to_string(time));
}

std::vector<int> concat(std::initializer_list<std::vector<int>> parts) {
    std::vector<int> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

Mat submatrix(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Mat out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

Vec subvector(const Vec& v, const std::vector<int>& idx) {
    Vec out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

JointGaussian joint_covariance(const MarkovModel& model) {
    return chain_joint(
        model.horizon(), model.dim(), model.init_mean(), model.init_cov(),
        [&](int k) -> const Mat& { return model.transition(k); }, [&](int k) -> const Mat& { return model.noise_cov(k); });
}

JointGaussian joint_covariance(const JointStateSpace& joint) {
    return chain_joint(
        joint.horizon, joint.dim(), joint.init_mean, joint.init_cov,
        [&](int k) -> const Mat& { return joint.transition(k); }, [&](int k) -> const Mat& { return joint.noise_cov(k); });
}

JointGaussian joint_covariance(const CmlParams& params) {
    params.validate();
    const int n = params.horizon;
    const int d = params.dim();
    const int total = (n + 1) * d;
    check_size(total);

    // A x = e + c with x = (x_0, .., x_N) stacked by time.
    Mat a = Mat::Identity(total, total);
    Mat w = Mat::Zero(total, total);
    Vec c = Vec::Zero(total);
    const Mat& gn0 = params.boundary.final_from_initial;

    w.block(0, 0, d, d) = params.boundary.initial_cov;
    c.segment(0, d) = params.mean_initial;

    a.block(n * d, 0, d, d) = -gn0;
    w.block(n * d, n * d, d, d) = params.boundary.final_cov;
    c.segment(n * d, d) = params.mean_final - gn0 * params.mean_initial;

    for (int k = 1; k <= n - 1; ++k) {
        a.block(k * d, (k - 1) * d, d, d) = -params.prev(k);
        a.block(k * d, n * d, d, d) = -params.dest(k);
        w.block(k * d, k * d, d, d) = params.noise(k);
    }

    JointGaussian jg = solve_linear_gaussian(a, w, c);
    jg.ranges = state_ranges(n, d);
    return jg;
}

JointGaussian guided_joint_covariance(const GuidedSystem& sys) {
    const int n = sys.guide.horizon();
    const int d = sys.guide.dim();
    const int total = 2 * (n + 1) * d;
    check_size(total);
    const GuidedLayout at{d};
    Mat a = Mat::Identity(total, total);
    Mat w = Mat::Zero(total, total);
    Vec c = Vec::Zero(total);

    w.block(at.guide(0), at.guide(0), d, d) = sys.guide.init_cov();
    c.segment(at.guide(0), d) = sys.guide.init_mean();
    for (int k = 1; k <= n; ++k) {
        a.block(at.guide(k), at.guide(k - 1), d, d) = -sys.guide.transition(k);
        w.block(at.guide(k), at.guide(k), d, d) = sys.guide.noise_cov(k);
    }

    w.block(at.object(0), at.object(0), d, d) = sys.object_init.cov;
    c.segment(at.object(0), d) = sys.object_init.mean;
    for (int k = 1; k <= n - 1; ++k) {
        a.block(at.object(k), at.object(k - 1), d, d) = -sys.object.prev_at(k);
        a.block(at.object(k), at.guide(k - 1), d, d) = -sys.object.guide_at(k);
        w.block(at.object(k), at.object(k), d, d) = sys.object.noise_at(k);
    }
    a.block(at.object(n), at.guide(n), d, d) = -Mat::Identity(d, d);
    w.block(at.object(n), at.object(n), d, d) = sys.terminal_cov;

    JointGaussian jg = solve_linear_gaussian(a, w, c);
    jg.ranges = state_ranges(n, 2 * d);
    return jg;
}

JointGaussian guided_joint_covariance(const DestinationGuidedSystem& sys) {
    const CmlParams& g = sys.guide_cml;
    const int n = g.horizon;
    const int d = g.dim();
    const int total = 2 * (n + 1) * d;
    check_size(total);
    const GuidedLayout at{d};
    Mat a = Mat::Identity(total, total);
    Mat w = Mat::Zero(total, total);
    Vec c = Vec::Zero(total);

    const Mat& gn0 = g.boundary.final_from_initial;
    w.block(at.guide(0), at.guide(0), d, d) = g.boundary.initial_cov;
    c.segment(at.guide(0), d) = g.mean_initial;
    a.block(at.guide(n), at.guide(0), d, d) = -gn0;
    w.block(at.guide(n), at.guide(n), d, d) = g.boundary.final_cov;
    c.segment(at.guide(n), d) = g.mean_final - gn0 * g.mean_initial;
    for (int k = 1; k <= n - 1; ++k) {
        a.block(at.guide(k), at.guide(k - 1), d, d) = -g.prev(k);
        a.block(at.guide(k), at.guide(n), d, d) = -g.dest(k);
        w.block(at.guide(k), at.guide(k), d, d) = g.noise(k);
    }

    w.block(at.object(0), at.object(0), d, d) = sys.object_init.cov;
    c.segment(at.object(0), d) = sys.object_init.mean;
    for (int k = 1; k <= n - 1; ++k) {
        a.block(at.object(k), at.object(k - 1), d, d) = -sys.object.prev_at(k);
        a.block(at.object(k), at.guide(k - 1), d, d) = -sys.object.guide_at(k);
        w.block(at.object(k), at.object(k), d, d) = sys.object.noise_at(k);
    }
    a.block(at.object(n), at.guide(n), d, d) = -Mat::Identity(d, d);
    w.block(at.object(n), at.object(n), d, d) = sys.terminal_cov;

    JointGaussian jg = solve_linear_gaussian(a, w, c);
    jg.ranges = state_ranges(n, 2 * d);
    return jg;
}

JointGaussian joint_with_measurements(const JointStateSpace& joint, const MeasurementModel& m) {
    m.validate(joint.block_dim);
    const JointGaussian states = joint_covariance(joint);
    const int n = joint.horizon;
    const int sd = joint.dim();
    const Mat h = m.stacked_h(joint, true, true);
    const Mat r = m.stacked_r(true, true);
    const int zd = static_cast<int>(h.rows());
    const int ns = (n + 1) * sd;
    const int total = ns + n * zd;
    check_size(total);

    // Measurement map: z = Hbig s + v, Hbig picks s_k for z_k.
    Mat hbig = Mat::Zero(n * zd, ns);
    Mat rbig = Mat::Zero(n * zd, n * zd);
    for (int k = 1; k <= n; ++k) {
        hbig.block((k - 1) * zd, k * sd, zd, sd) = h;
        rbig.block((k - 1) * zd, (k - 1) * zd, zd, zd) = r;
    }

    JointGaussian jg;
    jg.mean.resize(total);
    jg.mean << states.mean, hbig * states.mean;
    jg.cov.resize(total, total);
    const Mat cross = hbig * states.cov;
    jg.cov.topLeftCorner(ns, ns) = states.cov;
    jg.cov.bottomLeftCorner(n * zd, ns) = cross;
    jg.cov.topRightCorner(ns, n * zd) = cross.transpose();
    jg.cov.bottomRightCorner(n * zd, n * zd) = symmetrize(cross * hbig.transpose() + rbig);
    jg.ranges = states.ranges;
    for (int k = 1; k <= n; ++k) jg.ranges.push_back({Segment::Measurement, k, ns + (k - 1) * zd, zd});
    return jg;
}

Conditional gaussian_condition(const JointGaussian& jg, const std::vector<int>& target, const std::vector<int>& given) {
    const std::set<int> t(target.begin(), target.end());
    for (int g : given)
        if (t.count(g)) throw ConfigError("gaussian_condition: target and given index sets overlap");

    Conditional out;
    out.target_mean = subvector(jg.mean, target);
    out.given_mean = subvector(jg.mean, given);
    const Mat stt = submatrix(jg.cov, target, target);
    if (given.empty()) {
        out.weights = Mat::Zero(static_cast<Eigen::Index>(target.size()), 0);
        out.cov = stt;
        return out;
    }
    const Mat sgg = submatrix(jg.cov, given, given);
    const Mat sgt = submatrix(jg.cov, given, target);
    Eigen::LLT<Mat> llt(sgg);
    if (llt.info() != Eigen::Success) throw NumericError("gaussian_condition: conditioning block is singular");
    out.weights = llt.solve(sgt).transpose();
    out.cov = symmetrize(stt - out.weights * sgt);
    return out;
}

}  // namespace cmguide
