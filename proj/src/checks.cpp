#include "cmguide/checks.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cmguide/cml_model.hpp"
#include "cmguide/errors.hpp"
#include "cmguide/estimation.hpp"
#include "cmguide/guided_model.hpp"
#include "cmguide/oracle.hpp"

namespace cmguide {

namespace {

class Tracker {
public:
    Tracker(std::string name, double tol) {
        result_.name = std::move(name);
        result_.tolerance = tol;
    }

    void observe(double err, const std::string& where) {
        if (!std::isfinite(err) || err > result_.worst) {
            result_.worst = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
            worst_at_ = where;
        }
    }
    void count() { ++result_.cases; }
    void fail(const std::string& why) {
        failure_ = why;
        result_.worst = std::numeric_limits<double>::infinity();
    }

    CheckResult finish() {
        result_.passed = failure_.empty() && result_.worst <= result_.tolerance;
        std::ostringstream os;
        if (!failure_.empty())
            os << failure_;
        else if (!worst_at_.empty())
            os << "worst at " << worst_at_;
        result_.detail = os.str();
        return result_;
    }

private:
    CheckResult result_;
    std::string worst_at_;
    std::string failure_;
};

int pick(Rng& rng, int lo, int hi) { return rng.uniform_int(lo, hi); }
double pick_real(Rng& rng, double lo, double hi) { return rng.uniform(lo, hi); }

std::string at(const char* what, int instance, int k) {
    std::ostringstream os;
    os << what << " instance " << instance << " k=" << k;
    return os.str();
}

Mat random_matrix(Rng& rng, int rows, int cols) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

Vec random_vector(Rng& rng, int n, double scale) { return scale * rng.standard_normal(n); }

// Small NCV-based guided instances shared by the filter batteries.
struct GuidedInstance {
    GuidedSystem markov;
    DestinationGuidedSystem destination;
    MeasurementModel measurement;
};

GuidedInstance random_guided_instance(Rng& rng, int horizon) {
    NcvConfig cfg;
    cfg.T = pick_real(rng, 0.5, 2.0);
    cfg.q = pick_real(rng, 0.1, 1.0);
    cfg.N = horizon;
    cfg.planar = false;
    const int d = 2;
    const Mat guide_cov = random_spd(rng, d);
    const Vec guide_mean = random_vector(rng, d, 5.0);
    const MarkovModel guide = make_ncv_model(cfg, guide_mean, guide_cov);
    const Mat& F = guide.transition(1);
    const Mat& Q = guide.noise_cov(1);
    const GaussianPrior object_init{random_vector(rng, d, 5.0), random_spd(rng, d)};
    const Mat terminal = pick_real(rng, 0.01, 0.1) * Mat::Identity(d, d);

    EndpointDensity ep;
    ep.mean_initial = guide_mean;
    ep.cov_initial = guide_cov;
    ep.mean_final = random_vector(rng, d, 20.0);
    ep.cov_final = random_spd(rng, d);
    const Mat l0 = Eigen::LLT<Mat>(ep.cov_initial).matrixL();
    const Mat ln = Eigen::LLT<Mat>(ep.cov_final).matrixL();
    ep.cross_final_initial = 0.5 * ln * l0.transpose();
    const CmlParams guide_cml = set_endpoint_density(derive_induced_params(guide), ep);

    MeasurementModel m;
    m.object_h = position_selector(d);
    m.guide_h = position_selector(d);
    m.object_r = pick_real(rng, 0.5, 2.0) * Mat::Identity(1, 1);
    m.guide_r = pick_real(rng, 0.5, 2.0) * Mat::Identity(1, 1);

    return GuidedInstance{build_markov_guided(F, Q, guide, terminal, object_init),
                          build_cml_guided(F, Q, guide_cml, terminal, object_init), m};
}

}  // namespace

Mat random_spd(Rng& rng, int dim) {
    const Mat b = random_matrix(rng, dim, dim);
    return symmetrize(b * b.transpose() / dim + 0.2 * Mat::Identity(dim, dim));
}

MarkovModel random_markov_model(Rng& rng, int dim, int horizon) {
    std::vector<Mat> f, q;
    for (int k = 1; k <= horizon; ++k) {
        f.push_back(Mat::Identity(dim, dim) + 0.25 * random_matrix(rng, dim, dim));
        q.push_back(random_spd(rng, dim));
    }
    return MarkovModel(std::move(f), std::move(q), random_vector(rng, dim, 1.0), random_spd(rng, dim));
}

CheckResult check_induced_vs_oracle(std::uint64_t seed, int models, double tol, Fault fault) {
    Tracker t("induced parameters = Gaussian conditioning of the Markov joint", tol);
    static constexpr int kDims[] = {1, 2, 4};
    for (int i = 0; i < models; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int dim = kDims[i % 3];
        const int n = pick(rng, 2, 10);
        try {
            const MarkovModel m = random_markov_model(rng, dim, n);
            CmlParams p = derive_induced_params(m);
            if (fault == Fault::CorruptInducedGain) p.evo_dest.front()(0, 0) += 1e-3;
            const JointGaussian jg = joint_covariance(m);
            for (int k = 1; k <= n - 1; ++k) {
                const Conditional c = gaussian_condition(
                    jg, jg.indices(Segment::State, k),
                    concat({jg.indices(Segment::State, k - 1), jg.indices(Segment::State, n)}));
                const Mat prev = c.weights.leftCols(dim);
                const Mat dest = c.weights.rightCols(dim);
                t.observe(relative_error(p.prev(k), prev), at("G_{k,k-1}", i, k));
                t.observe(relative_error(p.dest(k), dest), at("G_{k,N}", i, k));
                t.observe(relative_error(p.noise(k), c.cov), at("G_k", i, k));
            }
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_mil_identity(std::uint64_t seed, int instances, double tol) {
    Tracker t("G_k direct form = matrix-inversion-lemma form", tol);
    for (int i = 0; i < instances; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int dim = pick(rng, 1, 4);
        const Mat mk = random_spd(rng, dim);
        const Mat c = random_spd(rng, dim);
        const Mat to_final = Mat::Identity(dim, dim) + 0.5 * random_matrix(rng, dim, dim);
        try {
            t.observe(relative_error(gk_via_mil(mk, to_final, c), gk_direct(mk, to_final, c)), at("MIL", i, 0));
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_distribution_equality(std::uint64_t seed, int models, double tol, Fault fault) {
    Tracker t("induced CM_L joint = source Markov joint", tol);
    for (int i = 0; i < models; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int dim = pick(rng, 1, 4);
        const int n = pick(rng, 2, 10);
        try {
            const MarkovModel m = random_markov_model(rng, dim, n);
            CmlParams p = derive_induced_params(m);
            if (fault == Fault::CorruptInducedGain) p.evo_dest.front()(0, 0) += 1e-3;
            const JointGaussian markov = joint_covariance(m);
            const JointGaussian cml = joint_covariance(p);
            t.observe(relative_error(cml.cov, markov.cov), at("covariance", i, n));
            t.observe(relative_error(cml.mean, markov.mean), at("mean", i, n));
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_stationary_equivalence(std::uint64_t seed, int models, double tol) {
    Tracker t("stationary formulas = time-varying construction", tol);
    for (int i = 0; i < models; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int dim = pick(rng, 1, 4);
        const int n = pick(rng, 2, 10);
        const Mat F = Mat::Identity(dim, dim) + 0.25 * random_matrix(rng, dim, dim);
        const Mat Q = random_spd(rng, dim);
        const Mat p0 = random_spd(rng, dim);
        try {
            const CmlParams a = derive_induced_params_stationary(F, Q, n, p0);
            const CmlParams b = derive_induced_params(MarkovModel::time_invariant(F, Q, n, Vec::Zero(dim), p0));
            for (int k = 1; k <= n - 1; ++k) {
                t.observe(relative_error(a.prev(k), b.prev(k)), at("G_{k,k-1}", i, k));
                t.observe(relative_error(a.dest(k), b.dest(k)), at("G_{k,N}", i, k));
                t.observe(relative_error(a.noise(k), b.noise(k)), at("G_k", i, k));
            }
            t.observe(relative_error(a.boundary.final_from_initial, b.boundary.final_from_initial), at("G_{N,0}", i, n));
            t.observe(relative_error(a.boundary.final_cov, b.boundary.final_cov), at("G_N", i, n));
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_endpoint_invariance(std::uint64_t seed, int models) {
    Tracker t("endpoint density change leaves evolution parameters bit-identical", 0.0);
    for (int i = 0; i < models; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int dim = pick(rng, 1, 4);
        const int n = pick(rng, 2, 10);
        try {
            const CmlParams p = derive_induced_params(random_markov_model(rng, dim, n));
            EndpointDensity ep{random_vector(rng, dim, 3.0), random_spd(rng, dim), random_vector(rng, dim, 3.0),
                               random_spd(rng, dim), Mat::Zero(dim, dim)};
            const CmlParams q = set_endpoint_density(p, ep);
            for (int k = 1; k <= n - 1; ++k) {
                const bool same = p.prev(k) == q.prev(k) && p.dest(k) == q.dest(k) && p.noise(k) == q.noise(k);
                t.observe(same ? 0.0 : 1.0, at("evolution", i, k));
            }
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_frozen_guide_reduction(std::uint64_t seed, int instances, double tol) {
    Tracker t("frozen guide reduces the guided model to the CM_L model", tol);
    for (int i = 0; i < instances; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int dim = pick(rng, 1, 4);
        const int n = pick(rng, 2, 10);
        const Mat F = Mat::Identity(dim, dim) + 0.25 * random_matrix(rng, dim, dim);
        const Mat Q = random_spd(rng, dim);
        const Vec target = random_vector(rng, dim, 10.0);
        const GaussianPrior object_init{random_vector(rng, dim, 10.0), random_spd(rng, dim)};
        try {
            // Identity transitions; sampled noise-free the guide stays at `target`.
            const MarkovModel frozen =
                MarkovModel::time_invariant(Mat::Identity(dim, dim), Q, n, target, Mat::Identity(dim, dim));
            const GuidedSystem sys = build_markov_guided(F, Q, frozen, 1e-4 * Mat::Identity(dim, dim), object_init);
            CmlParams cml = derive_induced_params(MarkovModel::time_invariant(F, Q, n, Vec::Zero(dim), Q));
            for (int k = 1; k <= n - 1; ++k) {
                t.observe(relative_error(sys.object.prev_at(k), cml.prev(k)), at("G^x vs G_{k,k-1}", i, k));
                t.observe(relative_error(sys.object.guide_at(k), cml.dest(k)), at("G^{xd} vs G_{k,N}", i, k));
                t.observe(relative_error(sys.object.noise_at(k), cml.noise(k)), at("Cov(e_k) vs G_k", i, k));
            }

            cml.mean_initial = object_init.mean;
            cml.mean_final = target;
            const Trajectory ddt = sample_ddt(cml, 0, Noise::Zero);
            const GuidedPaths guided = sample_guided(assemble_joint(sys), 0, Noise::Zero);
            for (int k = 0; k <= n; ++k) {
                t.observe(relative_error(guided.object[k], ddt[k]), at("noise-free path", i, k));
                t.observe(relative_error(guided.guide[k], target), at("frozen guide value", i, k));
            }
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_guided_joint(std::uint64_t seed, int instances, double tol) {
    Tracker t("stacked guided model = guided equations solved densely", tol);
    for (int i = 0; i < instances; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int n = pick(rng, 2, 10);
        try {
            const GuidedInstance inst = random_guided_instance(rng, n);
            const int d = inst.markov.guide.dim();

            const JointGaussian stacked = joint_covariance(assemble_joint(inst.markov));
            const JointGaussian direct = guided_joint_covariance(inst.markov);
            t.observe(relative_error(stacked.cov, direct.cov), at("markov-guided covariance", i, n));
            t.observe(relative_error(stacked.mean, direct.mean), at("markov-guided mean", i, n));

            const JointGaussian aug = joint_covariance(assemble_joint_destination(inst.destination));
            const JointGaussian aug_direct = guided_joint_covariance(inst.destination);
            std::vector<int> ia, io;
            for (int k = 0; k <= n; ++k) {
                const auto a = aug.indices(Segment::State, k);
                const auto o = aug_direct.indices(Segment::State, k);
                ia.insert(ia.end(), a.begin(), a.begin() + 2 * d);
                io.insert(io.end(), o.begin(), o.end());
                // Destination block at time k is d_N.
                const auto dest = aug.indices(Segment::State, k, 2 * d, d);
                const auto dn = aug_direct.indices(Segment::State, n, d, d);
                ia.insert(ia.end(), dest.begin(), dest.end());
                io.insert(io.end(), dn.begin(), dn.end());
            }
            t.observe(relative_error(submatrix(aug.cov, ia, ia), submatrix(aug_direct.cov, io, io)),
                      at("cml-guided covariance", i, n));
            t.observe(relative_error(subvector(aug.mean, ia), subvector(aug_direct.mean, io)),
                      at("cml-guided mean", i, n));
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_batch_filter(std::uint64_t seed, int instances, bool destination, double tol) {
    Tracker t(destination ? "recursive filter = batch conditioning (destination-augmented model)"
                          : "recursive filter = batch conditioning (object/guide model)",
              tol);
    constexpr int kHorizon = 6;
    for (int i = 0; i < instances; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        try {
            const GuidedInstance inst = random_guided_instance(rng, kHorizon);
            const JointStateSpace joint =
                destination ? assemble_joint_destination(inst.destination) : assemble_joint(inst.markov);
            const JointSampler sampler(joint);
            const GuidedPaths paths = split_paths(joint, sampler.sample(rng));
            const MeasurementSeries z = simulate_measurements(paths.object, paths.guide, inst.measurement, rng);
            const auto beliefs = run_filter(joint, inst.measurement, z, prior_belief(joint));

            const JointGaussian jg = joint_with_measurements(joint, inst.measurement);
            Vec observed(0);
            std::vector<int> given;
            for (int k = 1; k <= kHorizon; ++k) {
                const auto zi = jg.indices(Segment::Measurement, k);
                given.insert(given.end(), zi.begin(), zi.end());
                Vec zk(static_cast<Eigen::Index>(zi.size()));
                zk << *z[static_cast<std::size_t>(k - 1)].object, *z[static_cast<std::size_t>(k - 1)].guide;
                Vec grown(observed.size() + zk.size());
                grown << observed, zk;
                observed = grown;

                const Conditional c = gaussian_condition(jg, jg.indices(Segment::State, k), given);
                const GaussianBelief& b = beliefs[static_cast<std::size_t>(k - 1)];
                t.observe(relative_error(b.mean, c.mean_given(observed)), at("posterior mean", i, k));
                t.observe(relative_error(b.cov, c.cov), at("posterior covariance", i, k));
            }
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_prediction_semigroup(std::uint64_t seed, int instances, double tol) {
    Tracker t("n-step prediction composes: predict(a+b) = predict(predict(a), b)", tol);
    for (int i = 0; i < instances; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int n = pick(rng, 4, 12);
        try {
            const GuidedInstance inst = random_guided_instance(rng, n);
            const JointStateSpace joint =
                i % 2 == 0 ? assemble_joint(inst.markov) : assemble_joint_destination(inst.destination);
            const GaussianBelief start = prior_belief(joint);
            for (int total = 0; total <= n - 1; ++total) {
                const GaussianBelief direct = predict_n(start, total, joint);
                for (int a = 0; a <= total; ++a) {
                    const GaussianBelief two = predict_n(predict_n(start, a, joint), total - a, joint);
                    t.observe(relative_error(two.mean, direct.mean), at("mean", i, total));
                    t.observe(relative_error(two.cov, direct.cov), at("covariance", i, total));
                }
            }
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

CheckResult check_update_monotonicity(std::uint64_t seed, int instances) {
    Tracker t("update never increases covariance; posteriors symmetric", 0.0);
    for (int i = 0; i < instances; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const int n = pick(rng, 2, 12);
        try {
            const GuidedInstance inst = random_guided_instance(rng, n);
            const JointStateSpace joint =
                i % 2 == 0 ? assemble_joint(inst.markov) : assemble_joint_destination(inst.destination);
            const JointSampler sampler(joint);
            const GuidedPaths paths = split_paths(joint, sampler.sample(rng));
            const MeasurementSeries z = simulate_measurements(paths.object, paths.guide, inst.measurement, rng);
            GaussianBelief b = prior_belief(joint);
            for (int k = 1; k <= n; ++k) {
                const GaussianBelief pred = predict_step(b, joint);
                b = update_step(pred, z[static_cast<std::size_t>(k - 1)], joint, inst.measurement);
                const bool ok = loewner_leq(b.cov, pred.cov) && is_symmetric(b.cov);
                t.observe(ok ? 0.0 : 1.0, at("update", i, k));
            }
        } catch (const std::exception& e) {
            t.fail(std::string("instance ") + std::to_string(i) + ": " + e.what());
        }
        t.count();
    }
    return t.finish();
}

std::vector<CheckResult> run_verification_suite(std::uint64_t seed, Fault fault) {
    std::vector<CheckResult> out;
    out.push_back(check_induced_vs_oracle(derive_seed(seed, 1), 60, 1e-9, fault));
    out.push_back(check_mil_identity(derive_seed(seed, 2), 60));
    out.push_back(check_distribution_equality(derive_seed(seed, 3), 60, 1e-8, fault));
    out.push_back(check_stationary_equivalence(derive_seed(seed, 4), 60));
    out.push_back(check_endpoint_invariance(derive_seed(seed, 5), 30));
    out.push_back(check_frozen_guide_reduction(derive_seed(seed, 6), 30));
    out.push_back(check_guided_joint(derive_seed(seed, 7), 20));
    out.push_back(check_batch_filter(derive_seed(seed, 8), 10, false));
    out.push_back(check_batch_filter(derive_seed(seed, 9), 10, true));
    out.push_back(check_prediction_semigroup(derive_seed(seed, 10), 10));
    out.push_back(check_update_monotonicity(derive_seed(seed, 11), 10));
    return out;
}

}  // namespace cmguide
