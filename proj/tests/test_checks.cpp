#include <gtest/gtest.h>

#include "cmguide/checks.hpp"

using namespace cmguide;

TEST(VerificationSuite, DefaultRunPasses) {
    const auto results = run_verification_suite(1);
    ASSERT_FALSE(results.empty());
    for (const CheckResult& r : results) {
        EXPECT_TRUE(r.passed) << r.name << ": " << r.detail << " worst " << r.worst;
        EXPECT_GT(r.cases, 0) << r.name;
        EXPECT_LE(r.worst, r.tolerance) << r.name;
    }
}

TEST(VerificationSuite, CorruptedGainIsCaught) {
    const auto results = run_verification_suite(1, Fault::CorruptInducedGain);
    int failed = 0;
    for (const CheckResult& r : results) failed += r.passed ? 0 : 1;
    EXPECT_GE(failed, 1);
    EXPECT_FALSE(check_induced_vs_oracle(1, 10, 1e-9, Fault::CorruptInducedGain).passed);
    EXPECT_FALSE(check_distribution_equality(1, 10, 1e-8, Fault::CorruptInducedGain).passed);
}

TEST(VerificationSuite, SameSeedSameNumbers) {
    const auto a = run_verification_suite(9);
    const auto b = run_verification_suite(9);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].worst, b[i].worst);
        EXPECT_EQ(a[i].detail, b[i].detail);
    }
}

TEST(RandomModels, SpdNoiseAndDeterminism) {
    Rng a(3), b(3);
    const MarkovModel m1 = random_markov_model(a, 3, 6);
    const MarkovModel m2 = random_markov_model(b, 3, 6);
    for (int k = 1; k <= 6; ++k) {
        EXPECT_EQ(m1.transition(k), m2.transition(k));
        EXPECT_TRUE(inspect_spd(m1.noise_cov(k)).positive_definite());
    }
}
