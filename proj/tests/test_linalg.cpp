#include <gtest/gtest.h>

#include "cmguide/errors.hpp"
#include "cmguide/linalg.hpp"
#include "test_support.hpp"

using namespace cmguide;
using cmguide::testing::mat;
using cmguide::testing::MatrixNear;

TEST(Linalg, CovarianceFactorReproducesSpdInput) {
    const Mat c = mat({{4, 1, 0.5}, {1, 3, 0.2}, {0.5, 0.2, 2}});
    const Mat l = covariance_factor(c);
    EXPECT_TRUE(MatrixNear(l * l.transpose(), c, 1e-12));
}

TEST(Linalg, CovarianceFactorHandlesPsdInput) {
    // Rank one: the Cholesky path fails and the eigen square root takes over.
    const Mat c = mat({{1, 1}, {1, 1}});
    const Mat l = covariance_factor(c);
    EXPECT_LE((l * l.transpose() - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Linalg, CovarianceFactorRejectsIndefinite) {
    EXPECT_THROW(covariance_factor(mat({{1, 0}, {0, -1}})), NumericError);
}

TEST(Linalg, RequireSpdRejectsBadMatrices) {
    EXPECT_THROW(require_spd(mat({{1, 0.5}, {0.4, 1}}), "asym"), ConfigError);
    EXPECT_THROW(require_spd(mat({{1, 2}, {2, 1}}), "indef"), ConfigError);
    EXPECT_THROW(require_spd(mat({{1, 0}, {0, 1e-13}}), "near-singular"), ConfigError);
    EXPECT_THROW(require_spd(Mat::Zero(2, 3), "rect"), ConfigError);
    EXPECT_NO_THROW(require_spd(mat({{2, 1}, {1, 2}}), "ok"));
}

TEST(Linalg, LoewnerOrder) {
    const Mat a = mat({{1, 0}, {0, 1}});
    EXPECT_TRUE(loewner_leq(a, 2 * a));
    EXPECT_FALSE(loewner_leq(2 * a, a));
    EXPECT_FALSE(loewner_leq(a, mat({{3, 0}, {0, 0.5}})));
}

TEST(Linalg, BlockDiagAndPower) {
    const Mat f = mat({{1, 2}, {0, 1}});
    EXPECT_TRUE(MatrixNear(matrix_power(f, 3), mat({{1, 6}, {0, 1}}), 0.0));
    const Mat b = block_diag({f, Mat::Identity(1, 1)});
    EXPECT_EQ(b.rows(), 3);
    EXPECT_EQ(b(2, 2), 1.0);
    EXPECT_EQ(b(0, 2), 0.0);
}
