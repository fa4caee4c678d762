#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmguide/markov_model.hpp"
#include "cmguide/random.hpp"

namespace cmguide {

/// Outcome of one property battery: the worst error seen against its tolerance.
struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double tolerance = 0.0;
    int cases = 0;
    std::string detail;
};

/// Deliberate corruption used to confirm the batteries can fail.
enum class Fault { None, CorruptInducedGain };

/// Random Markov model with well-conditioned transitions I + 0.25 A and
/// SPD noises B B'/dim + 0.2 I.
MarkovModel random_markov_model(Rng& rng, int dim, int horizon);

/// Random SPD matrix with eigenvalues bounded away from zero.
Mat random_spd(Rng& rng, int dim);

/// Induced CM_L parameters vs. conditioning p(x_k | x_{k-1}, x_N) of the dense joint.
CheckResult check_induced_vs_oracle(std::uint64_t seed, int models, double tol = 1e-9, Fault fault = Fault::None);

/// Direct G_k formula vs. its matrix-inversion-lemma form.
CheckResult check_mil_identity(std::uint64_t seed, int instances, double tol = 1e-10);

/// Joint law of the induced CM_L model vs. the source Markov joint.
CheckResult check_distribution_equality(std::uint64_t seed, int models, double tol = 1e-8,
                                        Fault fault = Fault::None);

/// Stationary induced formulas vs. the time-varying construction on time-invariant models.
CheckResult check_stationary_equivalence(std::uint64_t seed, int models, double tol = 1e-12);

/// Replacing the endpoint density leaves the evolution parameters bit-identical.
CheckResult check_endpoint_invariance(std::uint64_t seed, int models);

/// With a frozen guide, the guided object's coefficients equal the CM_L coefficients
/// and its noise-free path equals the CM_L path with x_N = guide value.
CheckResult check_frozen_guide_reduction(std::uint64_t seed, int instances, double tol = 1e-12);

/// Stacked assembly vs. the guided model's own equations solved densely.
CheckResult check_guided_joint(std::uint64_t seed, int instances, double tol = 1e-9);

/// Recursive filter vs. conditioning on all past measurements in the dense joint.
/// NCV per-target state (dim 2), horizon 6.
CheckResult check_batch_filter(std::uint64_t seed, int instances, bool destination, double tol = 1e-8);

/// predict_n(a + b) vs. predict_n(predict_n(a), b) for every split.
CheckResult check_prediction_semigroup(std::uint64_t seed, int instances, double tol = 1e-10);

/// Every posterior covariance is symmetric and below its prediction in the PSD order.
CheckResult check_update_monotonicity(std::uint64_t seed, int instances);

/// The default verification battery run by `cmguide verify`.
std::vector<CheckResult> run_verification_suite(std::uint64_t seed, Fault fault = Fault::None);

}  // namespace cmguide
