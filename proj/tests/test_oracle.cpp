#include <gtest/gtest.h>

#include "cmguide/checks.hpp"
#include "cmguide/errors.hpp"
#include "cmguide/oracle.hpp"
#include "test_support.hpp"

using namespace cmguide;
using cmguide::testing::mat;
using cmguide::testing::MatrixNear;
using cmguide::testing::scalar;

namespace {

MarkovModel random_walk(int n) { return MarkovModel::time_invariant(scalar(1), scalar(1), n, Vec::Zero(1), scalar(1)); }

}  // namespace

// =============================================================================
// Dense joint laws
// =============================================================================

TEST(JointCovariance, RandomWalkHandPropagation) {
    const JointGaussian jg = joint_covariance(random_walk(2));
    EXPECT_TRUE(MatrixNear(jg.cov, mat({{1, 1, 1}, {1, 2, 2}, {1, 2, 3}}), 1e-15));
    EXPECT_TRUE(jg.mean.isZero(0.0));
    ASSERT_EQ(jg.ranges.size(), 3u);
    EXPECT_EQ(jg.indices(Segment::State, 2), std::vector<int>({2}));
    EXPECT_THROW(jg.indices(Segment::State, 3), IndexError);
    EXPECT_THROW(jg.indices(Segment::Measurement, 1), IndexError);
}

TEST(JointCovariance, NcvMatchesMonteCarlo) {
    const MarkovModel m = make_ncv_model(NcvConfig{1.0, 0.5, 5, false});
    const JointGaussian jg = joint_covariance(m);
    constexpr int kRuns = 1000000;
    Mat outer = Mat::Zero(12, 12);
    Vec x(12);
    for (int r = 0; r < kRuns; ++r) {
        Rng rng = Rng::stream(7, static_cast<std::uint64_t>(r));
        const Trajectory t = sample_markov(m, rng);
        for (int k = 0; k <= 5; ++k) x.segment(2 * k, 2) = t[k];
        outer.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    const Mat sample = Mat(outer.selfadjointView<Eigen::Lower>()) / kRuns;
    EXPECT_LT(relative_error(sample, jg.cov), 0.02);
}

TEST(JointCovariance, CmlFormOfInducedModelEqualsMarkovJoint) {
    const CheckResult r = check_distribution_equality(19, 40);
    EXPECT_TRUE(r.passed) << r.detail << " worst " << r.worst;
}

TEST(JointCovariance, CmlParamsRandomWalkHorizonTwo) {
    const JointGaussian jg = joint_covariance(derive_induced_params(random_walk(2)));
    EXPECT_TRUE(MatrixNear(jg.cov, mat({{1, 1, 1}, {1, 2, 2}, {1, 2, 3}}), 1e-14));
}

TEST(JointCovariance, StackedModelLayout) {
    const MarkovModel guide = make_ncv_model(NcvConfig{1.0, 0.005, 4, false});
    const JointStateSpace j = assemble_joint(build_markov_guided(
        guide.transition(1), guide.noise_cov(1), guide, 1e-4 * Mat::Identity(2, 2), {Vec::Ones(2), Mat::Identity(2, 2)}));
    const JointGaussian jg = joint_covariance(j);
    EXPECT_EQ(jg.cov.rows(), 20);
    EXPECT_TRUE(MatrixNear(submatrix(jg.cov, jg.indices(Segment::State, 0), jg.indices(Segment::State, 0)), j.init_cov,
                           0.0));
    EXPECT_EQ(jg.indices(Segment::State, 2, 2, 2), std::vector<int>({10, 11}));
}

TEST(JointCovariance, SizeOverrun) {
    const MarkovModel big = MarkovModel::time_invariant(Mat::Identity(50, 50), Mat::Identity(50, 50), 200,
                                                        Vec::Zero(50), Mat::Identity(50, 50));
    EXPECT_THROW(joint_covariance(big), ResourceError);
}

// =============================================================================
// Gaussian conditioning
// =============================================================================

TEST(GaussianCondition, EmptyGivenSetIsMarginal) {
    const JointGaussian jg = joint_covariance(random_walk(3));
    const Conditional c = gaussian_condition(jg, {1, 3}, {});
    EXPECT_EQ(c.weights.cols(), 0);
    EXPECT_TRUE(MatrixNear(c.cov, mat({{2, 2}, {2, 4}}), 0.0));
    EXPECT_TRUE(c.target_mean.isZero(0.0));
}

TEST(GaussianCondition, MarkovPropertyOneStep) {
    Rng rng(1);
    const MarkovModel m = random_markov_model(rng, 3, 5);
    const JointGaussian jg = joint_covariance(m);
    for (int k = 1; k <= 5; ++k) {
        const Conditional c = gaussian_condition(jg, jg.indices(Segment::State, k), jg.indices(Segment::State, k - 1));
        EXPECT_TRUE(MatrixNear(c.weights, m.transition(k), 1e-12)) << k;
        EXPECT_TRUE(MatrixNear(c.cov, m.noise_cov(k), 1e-12)) << k;
    }
}

TEST(GaussianCondition, MeanOfConditional) {
    JointGaussian jg = joint_covariance(random_walk(2));
    jg.mean = (Vec(3) << 1.0, 1.0, 1.0).finished();
    const Conditional c = gaussian_condition(jg, {1}, {0, 2});
    EXPECT_NEAR(c.mean_given((Vec(2) << 3.0, 5.0).finished())(0), 1.0 + 0.5 * 2.0 + 0.5 * 4.0, 1e-14);
}

TEST(GaussianCondition, Errors) {
    const JointGaussian jg = joint_covariance(random_walk(2));
    EXPECT_THROW(gaussian_condition(jg, {1}, {1, 2}), ConfigError);
    JointGaussian singular = jg;
    singular.cov = Mat::Ones(3, 3);
    EXPECT_THROW(gaussian_condition(singular, {0}, {1, 2}), NumericError);
}

TEST(GaussianCondition, InducedParametersAreConditionals) {
    const CheckResult r = check_induced_vs_oracle(2, 50);
    EXPECT_TRUE(r.passed) << r.detail << " worst " << r.worst;
}

// =============================================================================
// Joint with measurements
// =============================================================================

TEST(JointWithMeasurements, DiagonalBlocksAndWhiteness) {
    const MarkovModel guide = make_ncv_model(NcvConfig{1.0, 0.005, 5, false});
    const JointStateSpace j = assemble_joint(build_markov_guided(
        guide.transition(1), guide.noise_cov(1), guide, 1e-4 * Mat::Identity(2, 2), {Vec::Ones(2), Mat::Identity(2, 2)}));
    const MeasurementModel m{position_selector(2), position_selector(2), scalar(0.7), scalar(1.3)};
    const JointGaussian jg = joint_with_measurements(j, m);
    for (int k = 1; k <= 5; ++k) {
        const auto s = jg.indices(Segment::State, k);
        const auto z = jg.indices(Segment::Measurement, k);
        const Mat h = m.stacked_h(j, true, true);
        EXPECT_TRUE(MatrixNear(submatrix(jg.cov, z, z), h * submatrix(jg.cov, s, s) * h.transpose() + mat({{0.7, 0}, {0, 1.3}}),
                               1e-13));
        EXPECT_TRUE(MatrixNear(submatrix(jg.cov, z, s), h * submatrix(jg.cov, s, s), 1e-13));
        for (int l = 1; l < k; ++l) {
            // Cross-time measurement covariance carries no R term.
            const auto zl = jg.indices(Segment::Measurement, l);
            const auto sl = jg.indices(Segment::State, l);
            EXPECT_TRUE(MatrixNear(submatrix(jg.cov, z, zl), h * submatrix(jg.cov, s, sl) * h.transpose(), 1e-13));
        }
    }
}

TEST(JointWithMeasurements, ZeroSelectorDecouplesMeasurements) {
    const MarkovModel guide = make_ncv_model(NcvConfig{1.0, 0.005, 4, false});
    const JointStateSpace j = assemble_joint(build_markov_guided(
        guide.transition(1), guide.noise_cov(1), guide, 1e-4 * Mat::Identity(2, 2), {Vec::Ones(2), Mat::Identity(2, 2)}));
    const MeasurementModel m{Mat::Zero(1, 2), Mat::Zero(1, 2), scalar(1), scalar(1)};
    const JointGaussian jg = joint_with_measurements(j, m);
    std::vector<int> states, meas;
    for (int k = 0; k <= 4; ++k) {
        const auto s = jg.indices(Segment::State, k);
        states.insert(states.end(), s.begin(), s.end());
    }
    for (int k = 1; k <= 4; ++k) {
        const auto z = jg.indices(Segment::Measurement, k);
        meas.insert(meas.end(), z.begin(), z.end());
    }
    EXPECT_TRUE(submatrix(jg.cov, meas, states).isZero(0.0));
    EXPECT_TRUE(MatrixNear(submatrix(jg.cov, meas, meas), Mat::Identity(8, 8), 0.0));
}
