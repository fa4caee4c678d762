#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cmguide/linalg.hpp"
#include "cmguide/markov_model.hpp"
#include "cmguide/random.hpp"

namespace cmguide {

/// Parameters of a CM_L model (Markov given the final state):
///   x_k = G_{k,k-1} x_{k-1} + G_{k,N} x_N + e_k,  k in [1, N-1],  Cov(e_k) = G_k
///   x_0 = mu_0 + e_0,                            Cov(e_0) = G_0
///   x_N = mu_N + G_{N,0} (x_0 - mu_0) + e_N,     Cov(e_N) = G_N
/// Interior means follow the evolution recursion driven by mu_0 and mu_N.
struct CmlBoundary {
    Mat final_from_initial;  ///< G_{N,0}
    Mat final_cov;           ///< G_N
    Mat initial_cov;         ///< G_0
};

struct CmlParams {
    int horizon = 0;
    std::vector<Mat> evo_prev;   ///< G_{k,k-1}, stored at index k-1
    std::vector<Mat> evo_dest;   ///< G_{k,N}
    std::vector<Mat> evo_noise;  ///< G_k
    CmlBoundary boundary;
    Vec mean_initial;  ///< mu_0
    Vec mean_final;    ///< mu_N

    int dim() const { return static_cast<int>(mean_initial.size()); }
    const Mat& prev(int k) const;
    const Mat& dest(int k) const;
    const Mat& noise(int k) const;

    /// Throws ConfigError if sizes are inconsistent or any covariance is not SPD.
    void validate() const;
};

/// Joint law of the two endpoints: x_0 ~ N(mu_0, C_0), x_N ~ N(mu_N, C_N), Cov(x_N, x_0) = C_{N,0}.
struct EndpointDensity {
    Vec mean_initial;
    Mat cov_initial;
    Vec mean_final;
    Mat cov_final;
    Mat cross_final_initial;  ///< C_{N,0}

    void validate() const;
};

/// CM_L parameters induced by a Markov model, so that the CM_L sequence and
/// the Markov sequence coincide in distribution.
CmlParams derive_induced_params(const MarkovModel& markov);

/// Same construction for a time-invariant model (F, Q) using powers of F.
/// The boundary uses `init_cov` for Cov(x_0) (Q when omitted).
CmlParams derive_induced_params_stationary(const Mat& F, const Mat& Q, int horizon,
                                           const std::optional<Mat>& init_cov = std::nullopt);

/// (M_k^{-1} + M_{N|k}' C_{N|k}^{-1} M_{N|k})^{-1}
Mat gk_direct(const Mat& noise_cov, const Mat& to_final, const Mat& controllability, int step = -1);

/// The same quantity via the matrix inversion lemma, without inverting M_k:
/// M_k - M_k M_{N|k}' (C_{N|k} + M_{N|k} M_k M_{N|k}')^{-1} M_{N|k} M_k.
Mat gk_via_mil(const Mat& noise_cov, const Mat& to_final, const Mat& controllability, int step = -1);

/// Replaces the boundary and means by those implied by `ep`; evolution parameters are untouched.
CmlParams set_endpoint_density(const CmlParams& params, const EndpointDensity& ep);

/// Draws x_0, then x_N, then the interior in time order.
Trajectory sample_ddt(const CmlParams& params, std::uint64_t seed, Noise noise = Noise::Sampled);
Trajectory sample_ddt(const CmlParams& params, Rng& rng, Noise noise = Noise::Sampled);

}  // namespace cmguide
