#include <gtest/gtest.h>

#include "cmguide/checks.hpp"
#include "cmguide/errors.hpp"
#include "cmguide/guided_model.hpp"
#include "cmguide/oracle.hpp"
#include "test_support.hpp"

using namespace cmguide;
using cmguide::testing::mat;
using cmguide::testing::MatrixNear;
using cmguide::testing::scalar;

namespace {

GuidedSystem scalar_guided(int n, double terminal = 1e-4) {
    const MarkovModel guide = MarkovModel::time_invariant(scalar(1), scalar(1), n, Vec::Zero(1), scalar(1));
    return build_markov_guided(scalar(1), scalar(1), guide, scalar(terminal), {Vec::Zero(1), scalar(1)});
}

GuidedSystem ncv_guided(int n, const Vec& guide_mean, const Vec& object_mean, double eps = 1e-4) {
    const NcvConfig cfg{1.0, 0.005, n, true};
    const MarkovModel guide = make_ncv_model(cfg, guide_mean, 0.01 * Mat::Identity(4, 4));
    return build_markov_guided(guide.transition(1), guide.noise_cov(1), guide, eps * Mat::Identity(4, 4),
                               {object_mean, 0.01 * Mat::Identity(4, 4)});
}

// A CM_L guide with no pull towards d_N: d_k = F d_{k-1} + w_k for k < N.
CmlParams uncoupled_cml(const MarkovModel& markov) {
    CmlParams p = derive_induced_params(markov);
    for (int k = 1; k <= markov.horizon() - 1; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        p.evo_prev[i] = markov.transition(k);
        p.evo_dest[i] = Mat::Zero(markov.dim(), markov.dim());
        p.evo_noise[i] = markov.noise_cov(k);
    }
    return p;
}

Mat sample_covariance(const std::vector<Vec>& xs) {
    Vec mean = Vec::Zero(xs.front().size());
    for (const Vec& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    Mat cov = Mat::Zero(mean.size(), mean.size());
    for (const Vec& x : xs) cov += (x - mean) * (x - mean).transpose();
    return cov / static_cast<double>(xs.size() - 1);
}

}  // namespace

// =============================================================================
// Building the object dynamics
// =============================================================================

TEST(BuildMarkovGuided, ScalarHorizonTwo) {
    const GuidedSystem sys = scalar_guided(2);
    EXPECT_EQ(sys.object.horizon, 2);
    EXPECT_NEAR(sys.object.prev_at(1)(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(sys.object.guide_at(1)(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(sys.object.noise_at(1)(0, 0), 0.5, 1e-15);
    EXPECT_THROW(sys.object.prev_at(2), IndexError);
}

TEST(BuildMarkovGuided, PaperScenarioNoiseIsSpd) {
    const GuidedSystem sys = ncv_guided(250, Vec::Zero(4), Vec::Zero(4));
    for (int k = 1; k <= 249; ++k) EXPECT_TRUE(inspect_spd(sys.object.noise_at(k)).positive_definite()) << k;
}

TEST(BuildMarkovGuided, DimensionMismatch) {
    const MarkovModel guide = make_ncv_model(NcvConfig{1.0, 0.005, 10, true});
    const Mat i4 = Mat::Identity(4, 4);
    const Mat i2 = Mat::Identity(2, 2);
    EXPECT_THROW(build_markov_guided(i2, i2, guide, i4, {Vec::Zero(4), i4}), ConfigError);
    EXPECT_THROW(build_markov_guided(i4, i2, guide, i4, {Vec::Zero(4), i4}), ConfigError);
    EXPECT_THROW(build_markov_guided(i4, i4, guide, i2, {Vec::Zero(4), i4}), ConfigError);
    EXPECT_THROW(build_markov_guided(i4, i4, guide, i4, {Vec::Zero(2), i2}), ConfigError);
}

TEST(BuildMarkovGuided, FrozenGuideReducesToCml) {
    // Single explicit instance: guide parked at d*, object must follow the CM_L law with x_N = d*.
    const Mat F = mat({{1, 1}, {0, 1}});
    const Mat Q = mat({{1.0 / 3, 0.5}, {0.5, 1}});
    const Vec target = (Vec(2) << 40.0, -1.0).finished();
    const MarkovModel frozen = MarkovModel::time_invariant(Mat::Identity(2, 2), Q, 6, target, Mat::Identity(2, 2));
    const GaussianPrior init{(Vec(2) << 0.0, 2.0).finished(), Mat::Identity(2, 2)};
    const GuidedSystem sys = build_markov_guided(F, Q, frozen, 1e-4 * Mat::Identity(2, 2), init);

    CmlParams cml = derive_induced_params_stationary(F, Q, 6);
    for (int k = 1; k <= 5; ++k) {
        EXPECT_TRUE(MatrixNear(sys.object.prev_at(k), cml.prev(k), 1e-12));
        EXPECT_TRUE(MatrixNear(sys.object.guide_at(k), cml.dest(k), 1e-12));
        EXPECT_TRUE(MatrixNear(sys.object.noise_at(k), cml.noise(k), 1e-12));
    }
    cml.mean_initial = init.mean;
    cml.mean_final = target;
    const Trajectory ddt = sample_ddt(cml, 0, Noise::Zero);
    const GuidedPaths paths = sample_guided(assemble_joint(sys), 0, Noise::Zero);
    for (int k = 0; k <= 6; ++k) {
        EXPECT_TRUE(MatrixNear(paths.object[k], ddt[k], 1e-12)) << "k=" << k;
        EXPECT_EQ(paths.guide[k], target);
    }
}

TEST(BuildMarkovGuided, FrozenGuideBattery) {
    const CheckResult r = check_frozen_guide_reduction(12, 100);
    EXPECT_TRUE(r.passed) << r.detail << " worst " << r.worst;
}

TEST(BuildCmlGuided, ZeroCouplingMatchesMarkovGuide) {
    Rng rng(4);
    const MarkovModel guide = random_markov_model(rng, 2, 7);
    const Mat F = Mat::Identity(2, 2) + 0.1 * mat({{0, 1}, {0, 0}});
    const Mat Q = random_spd(rng, 2);
    const GaussianPrior init{Vec::Ones(2), random_spd(rng, 2)};
    const Mat eps = 1e-3 * Mat::Identity(2, 2);
    const GuidedSystem plain = build_markov_guided(F, Q, guide, eps, init);
    const DestinationGuidedSystem dest = build_cml_guided(F, Q, uncoupled_cml(guide), eps, init);
    for (int k = 1; k <= 6; ++k) {
        EXPECT_EQ(dest.object.prev_at(k), plain.object.prev_at(k));
        EXPECT_EQ(dest.object.guide_at(k), plain.object.guide_at(k));
        EXPECT_EQ(dest.object.noise_at(k), plain.object.noise_at(k));
    }

    // Same law for [x_k; d_k] before the terminal step.
    const JointGaussian a = joint_covariance(assemble_joint(plain));
    const JointGaussian b = joint_covariance(assemble_joint_destination(dest));
    std::vector<int> ia, ib;
    for (int k = 0; k <= 6; ++k) {
        const auto x = a.indices(Segment::State, k);
        const auto y = b.indices(Segment::State, k, 0, 4);
        ia.insert(ia.end(), x.begin(), x.end());
        ib.insert(ib.end(), y.begin(), y.end());
    }
    EXPECT_TRUE(MatrixNear(submatrix(a.cov, ia, ia), submatrix(b.cov, ib, ib), 1e-12));
    EXPECT_TRUE(MatrixNear(subvector(a.mean, ia), subvector(b.mean, ib), 1e-12));
}

// =============================================================================
// Stacked assembly
// =============================================================================

TEST(AssembleJoint, BlockStructureAtEveryStep) {
    const GuidedSystem sys = ncv_guided(20, Vec::Zero(4), Vec::Ones(4));
    const JointStateSpace j = assemble_joint(sys);
    ASSERT_EQ(j.dim(), 8);
    ASSERT_EQ(j.blocks(), 2);
    for (int k = 1; k <= 20; ++k) {
        EXPECT_TRUE(j.transition(k).bottomLeftCorner(4, 4).isZero(0.0)) << k;
        EXPECT_EQ(j.transition(k).bottomRightCorner(4, 4), sys.guide.transition(k));
        if (k < 20) {
            EXPECT_TRUE(j.noise_cov(k).topRightCorner(4, 4).isZero(0.0)) << k;
            EXPECT_TRUE(j.noise_cov(k).bottomLeftCorner(4, 4).isZero(0.0)) << k;
            EXPECT_EQ(j.transition(k).topLeftCorner(4, 4), sys.object.prev_at(k));
            EXPECT_EQ(j.transition(k).topRightCorner(4, 4), sys.object.guide_at(k));
        }
    }
}

TEST(AssembleJoint, TerminalStepEncodesMissRelation) {
    const GuidedSystem sys = ncv_guided(10, Vec::Zero(4), Vec::Zero(4), 2e-4);
    const JointStateSpace j = assemble_joint(sys);
    const Mat& t = j.transition(10);
    const Mat& w = sys.guide.noise_cov(10);
    EXPECT_TRUE(t.topLeftCorner(4, 4).isZero(0.0));
    EXPECT_EQ(t.topRightCorner(4, 4), sys.guide.transition(10));
    const Mat& s = j.noise_cov(10);
    EXPECT_TRUE(MatrixNear(s.topLeftCorner(4, 4), sys.terminal_cov + w, 1e-15));
    EXPECT_EQ(s.topRightCorner(4, 4), w);
    EXPECT_EQ(s.bottomRightCorner(4, 4), w);
    // Cov(x_N - d_N | s_{N-1}) = [I -I] S [I -I]' = terminal_cov.
    Mat diff(4, 8);
    diff << Mat::Identity(4, 4), -Mat::Identity(4, 4);
    EXPECT_TRUE(MatrixNear(diff * s * diff.transpose(), sys.terminal_cov, 1e-12));
}

TEST(AssembleJoint, SelectorsAndOffsets) {
    const JointStateSpace j = assemble_joint(scalar_guided(3));
    EXPECT_EQ(j.offset(Block::Object), 0);
    EXPECT_EQ(j.offset(Block::Guide), 1);
    EXPECT_THROW(j.offset(Block::Destination), ConfigError);
    EXPECT_TRUE(MatrixNear(j.selector(Block::Guide), mat({{0, 1}}), 0.0));
    EXPECT_THROW(j.transition(0), IndexError);
    EXPECT_THROW(j.noise_cov(4), IndexError);
}

TEST(AssembleJoint, MatchesGuidedEquationsSolvedDensely) {
    const CheckResult r = check_guided_joint(21, 60);
    EXPECT_TRUE(r.passed) << r.detail << " worst " << r.worst;
}

TEST(AssembleJointDestination, DestinationRowIsIdentityWithoutNoise) {
    const MarkovModel guide = make_ncv_model(NcvConfig{1.0, 0.005, 9, true});
    const CmlParams g = derive_induced_params(guide);
    const DestinationGuidedSystem sys =
        build_cml_guided(guide.transition(1), guide.noise_cov(1), g, 1e-4 * Mat::Identity(4, 4),
                         {Vec::Zero(4), Mat::Identity(4, 4)});
    const JointStateSpace j = assemble_joint_destination(sys);
    ASSERT_EQ(j.dim(), 12);
    EXPECT_EQ(j.offset(Block::Destination), 8);
    for (int k = 1; k <= 9; ++k) {
        EXPECT_EQ(j.transition(k).bottomRows(4), j.selector(Block::Destination)) << k;
        EXPECT_TRUE(j.noise_cov(k).bottomRows(4).isZero(0.0)) << k;
        EXPECT_TRUE(j.noise_cov(k).rightCols(4).isZero(0.0)) << k;
        EXPECT_TRUE(j.transition(k).block(4, 0, 4, 4).isZero(0.0)) << k;
    }
    for (int k = 1; k <= 8; ++k) EXPECT_EQ(j.transition(k).block(4, 8, 4, 4), g.dest(k));
}

// =============================================================================
// Sampling
// =============================================================================

TEST(SampleGuided, ZeroNoiseZeroMeansIsZero) {
    const GuidedPaths p = sample_guided(assemble_joint(ncv_guided(30, Vec::Zero(4), Vec::Zero(4))), 5, Noise::Zero);
    ASSERT_EQ(p.object.horizon(), 30);
    ASSERT_EQ(p.guide.horizon(), 30);
    for (int k = 0; k <= 30; ++k) {
        EXPECT_EQ(p.object[k].norm(), 0.0);
        EXPECT_EQ(p.guide[k].norm(), 0.0);
    }
}

TEST(SampleGuided, DeterministicGivenSeed) {
    const JointStateSpace j = assemble_joint(ncv_guided(40, Vec::Ones(4), Vec::Zero(4)));
    const GuidedPaths a = sample_guided(j, 99);
    const GuidedPaths b = sample_guided(j, 99);
    for (int k = 0; k <= 40; ++k) EXPECT_EQ(a.stacked[k], b.stacked[k]);
}

TEST(SampleGuided, ZeroNoiseGuideIsStraightLine) {
    const Vec guide0 = (Vec(4) << 0.0, 1.0, 10.0, -0.5).finished();
    const Vec obj0 = (Vec(4) << -20.0, 0.0, 30.0, 0.0).finished();
    const GuidedPaths p = sample_guided(assemble_joint(ncv_guided(50, guide0, obj0)), 0, Noise::Zero);
    for (int k = 0; k <= 50; ++k) {
        EXPECT_NEAR(p.guide[k](0), k * 1.0, 1e-12);
        EXPECT_NEAR(p.guide[k](2), 10.0 - 0.5 * k, 1e-12);
    }
    EXPECT_TRUE(MatrixNear(p.object[50], p.guide[50], 1e-12));
}

TEST(SampleGuided, PaperScenarioObjectEndsNearGuide) {
    const Vec guide0 = (Vec(4) << 0.0, 0.5, 0.0, 0.3).finished();
    const Vec obj0 = (Vec(4) << -50.0, 0.0, 80.0, 0.0).finished();
    const JointStateSpace j = assemble_joint(ncv_guided(250, guide0, obj0));
    const double bound = 3.0 * std::sqrt(2e-4);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GuidedPaths p = sample_guided(j, seed);
        const double gap = std::hypot(p.object[250](0) - p.guide[250](0), p.object[250](2) - p.guide[250](2));
        EXPECT_LT(gap, bound) << "seed " << seed;
    }
}

TEST(SampleGuided, StackedCovarianceMatchesOracle) {
    Rng rng(3);
    const MarkovModel guide = random_markov_model(rng, 2, 8);
    const GuidedSystem sys =
        build_markov_guided(guide.transition(1), guide.noise_cov(1), guide, 0.05 * Mat::Identity(2, 2),
                            {Vec::Zero(2), random_spd(rng, 2)});
    const JointStateSpace j = assemble_joint(sys);
    const JointGaussian jg = guided_joint_covariance(sys);
    const auto idx = jg.indices(Segment::State, 5);
    const JointSampler sampler(j);

    std::vector<Vec> xs;
    for (int r = 0; r < 100000; ++r) {
        Rng s = Rng::stream(8, static_cast<std::uint64_t>(r));
        xs.push_back(sampler.sample(s)[5]);
    }
    EXPECT_LT(relative_error(sample_covariance(xs), submatrix(jg.cov, idx, idx)), 0.05);
}

TEST(SampleGuided, CmlGuideEndpointStatisticsMatchOracle) {
    const MarkovModel walk = MarkovModel::time_invariant(scalar(1), scalar(1), 3, Vec::Zero(1), scalar(1));
    const DestinationGuidedSystem sys =
        build_cml_guided(scalar(1), scalar(1), derive_induced_params(walk), scalar(0.1), {Vec::Zero(1), scalar(1)});
    const JointStateSpace j = assemble_joint_destination(sys);
    const JointGaussian jg = guided_joint_covariance(sys);
    const auto idx = concat({jg.indices(Segment::State, 0), jg.indices(Segment::State, 3)});
    const JointSampler sampler(j);

    std::vector<Vec> xs;
    for (int r = 0; r < 100000; ++r) {
        Rng s = Rng::stream(13, static_cast<std::uint64_t>(r));
        const Trajectory t = sampler.sample(s);
        Vec v(4);
        v << t[0](0), t[0](1), t[3](0), t[3](1);
        xs.push_back(v);
    }
    EXPECT_LT(relative_error(sample_covariance(xs), submatrix(jg.cov, idx, idx)), 0.05);
}

TEST(SampleGuided, TerminalMissCovariance) {
    const MarkovModel walk = MarkovModel::time_invariant(Mat::Identity(2, 2), Mat::Identity(2, 2), 5, Vec::Zero(2),
                                                         Mat::Identity(2, 2));
    const Mat eps = mat({{0.02, 0.005}, {0.005, 0.01}});
    const DestinationGuidedSystem sys = build_cml_guided(Mat::Identity(2, 2), Mat::Identity(2, 2),
                                                         derive_induced_params(walk), eps,
                                                         {Vec::Zero(2), Mat::Identity(2, 2)});
    const JointSampler sampler(assemble_joint_destination(sys));
    std::vector<Vec> gaps;
    for (int r = 0; r < 100000; ++r) {
        Rng s = Rng::stream(21, static_cast<std::uint64_t>(r));
        const Vec last = sampler.sample(s)[5];
        gaps.push_back(last.head(2) - last.segment(2, 2));
    }
    EXPECT_LT(relative_error(sample_covariance(gaps), eps), 0.05);
}

TEST(SampleGuided, DestinationBlockConstant) {
    const MarkovModel guide = make_ncv_model(NcvConfig{1.0, 0.005, 15, true});
    const DestinationGuidedSystem sys =
        build_cml_guided(guide.transition(1), guide.noise_cov(1), derive_induced_params(guide),
                         1e-4 * Mat::Identity(4, 4), {Vec::Zero(4), Mat::Identity(4, 4)});
    const JointStateSpace j = assemble_joint_destination(sys);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GuidedPaths p = sample_guided(j, seed);
        const Vec dn = p.stacked[0].tail(4);
        for (int k = 0; k <= 15; ++k) EXPECT_EQ(p.stacked[k].tail(4), dn);
        EXPECT_TRUE(MatrixNear(p.guide[15], dn, 0.0));
    }
}
