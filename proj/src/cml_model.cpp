#include "cmguide/cml_model.hpp"

#include <string>

#include "cmguide/errors.hpp"

namespace cmguide {

namespace {

const Mat& interior(const std::vector<Mat>& seq, int k, int horizon, const char* what) {
    if (k < 1 || k > horizon - 1)
        throw IndexError(std::string("CmlParams::") + what + ": k=" + std::to_string(k) + " outside [1,N-1]");
    return seq[static_cast<std::size_t>(k - 1)];
}

// C_{N|k} is inverted by the parameter formulas; refuse to invert a near-singular one.
void require_invertible_controllability(const Mat& c, int k) {
    const SpdReport r = inspect_spd(c);
    if (!r.positive_definite() || r.condition() > kMaxCondition)
        throw NumericError("C_{N|k} is singular or near-singular (condition " + std::to_string(r.condition()) + ")",
                           k);
}

}  // namespace

const Mat& CmlParams::prev(int k) const { return interior(evo_prev, k, horizon, "prev"); }
const Mat& CmlParams::dest(int k) const { return interior(evo_dest, k, horizon, "dest"); }
const Mat& CmlParams::noise(int k) const { return interior(evo_noise, k, horizon, "noise"); }

void CmlParams::validate() const {
    const auto n = mean_initial.size();
    if (n == 0) throw ConfigError("CmlParams: state dimension must be positive");
    if (horizon < 2) throw ConfigError("CmlParams: horizon N must be at least 2");
    const auto steps = static_cast<std::size_t>(horizon - 1);
    if (evo_prev.size() != steps || evo_dest.size() != steps || evo_noise.size() != steps)
        throw ConfigError("CmlParams: evolution sequences must have exactly N-1 entries");
    if (mean_final.size() != n) throw ConfigError("CmlParams: mean dimension mismatch");
    for (std::size_t i = 0; i < steps; ++i) {
        const int k = static_cast<int>(i) + 1;
        if (evo_prev[i].rows() != n || evo_prev[i].cols() != n || evo_dest[i].rows() != n ||
            evo_dest[i].cols() != n)
            throw ConfigError("CmlParams: evolution matrix dimension mismatch at k=" + std::to_string(k));
        require_spd(evo_noise[i], "CmlParams G_k", k);
    }
    if (boundary.final_from_initial.rows() != n || boundary.final_from_initial.cols() != n)
        throw ConfigError("CmlParams: G_{N,0} dimension mismatch");
    require_spd(boundary.final_cov, "CmlParams G_N");
    require_spd(boundary.initial_cov, "CmlParams G_0");
}

void EndpointDensity::validate() const {
    const auto n = mean_initial.size();
    if (n == 0 || mean_final.size() != n || cov_initial.rows() != n || cov_final.rows() != n ||
        cross_final_initial.rows() != n || cross_final_initial.cols() != n)
        throw ConfigError("EndpointDensity: dimension mismatch");
    Mat joint(2 * n, 2 * n);
    joint << cov_initial, cross_final_initial.transpose(), cross_final_initial, cov_final;
    require_spd(cov_initial, "EndpointDensity C_0");
    require_spd(cov_final, "EndpointDensity C_N");
    require_spd(joint, "EndpointDensity joint endpoint covariance");
}

Mat gk_direct(const Mat& noise_cov, const Mat& to_final, const Mat& controllability, int step) {
    const Mat info = spd_inverse(noise_cov, "M_k", step) +
                     to_final.transpose() * spd_solve(controllability, to_final, "C_{N|k}", step);
    return symmetrize(spd_inverse(symmetrize(info), "G_k information", step));
}

Mat gk_via_mil(const Mat& noise_cov, const Mat& to_final, const Mat& controllability, int step) {
    const Mat propagated = to_final * noise_cov;  // M_{N|k} M_k
    const Mat inner = symmetrize(controllability + propagated * to_final.transpose());
    return symmetrize(noise_cov - propagated.transpose() * spd_solve(inner, propagated, "C_{N|k} + M M_k M'", step));
}

CmlParams derive_induced_params(const MarkovModel& markov) {
    const int n = markov.horizon();
    const DestinationAggregates agg = destination_aggregates(markov);

    CmlParams p;
    p.horizon = n;
    p.evo_prev.reserve(static_cast<std::size_t>(n - 1));
    p.evo_dest.reserve(static_cast<std::size_t>(n - 1));
    p.evo_noise.reserve(static_cast<std::size_t>(n - 1));
    for (int k = 1; k <= n - 1; ++k) {
        const Mat& to_final = agg.to_final[static_cast<std::size_t>(k)];
        const Mat& c = agg.controllability[static_cast<std::size_t>(k)];
        require_invertible_controllability(c, k);

        Mat g = gk_direct(markov.noise_cov(k), to_final, c, k);
        // G_{k,N} = G_k M_{N|k}' C_{N|k}^{-1}
        Mat g_dest = g * spd_solve(c, to_final, "C_{N|k}", k).transpose();
        Mat g_prev = markov.transition(k) - g_dest * to_final * markov.transition(k);
        p.evo_prev.push_back(std::move(g_prev));
        p.evo_dest.push_back(std::move(g_dest));
        p.evo_noise.push_back(std::move(g));
    }

    // The endpoint joint of the Markov sequence: Cov(x_N, x_0) = M_{N|0} C_0.
    p.boundary.initial_cov = markov.init_cov();
    p.boundary.final_from_initial = agg.to_final[0];
    p.boundary.final_cov = agg.controllability[0];
    p.mean_initial = markov.init_mean();
    p.mean_final = agg.to_final[0] * markov.init_mean();
    return p;
}

CmlParams derive_induced_params_stationary(const Mat& F, const Mat& Q, int horizon,
                                           const std::optional<Mat>& init_cov) {
    if (F.rows() != F.cols() || Q.rows() != F.rows() || Q.cols() != F.cols())
        throw ConfigError("stationary induced parameters: F and Q must be square of equal size");
    if (horizon < 2) throw ConfigError("stationary induced parameters: horizon N must be at least 2");
    require_spd(Q, "stationary induced parameters Q");
    const Mat g0 = init_cov.value_or(Q);
    if (g0.rows() != F.rows() || g0.cols() != F.cols())
        throw ConfigError("stationary induced parameters: init_cov dimension mismatch");
    require_spd(g0, "stationary induced parameters init_cov");

    const int n = horizon;
    const auto d = F.rows();
    const auto steps = static_cast<std::size_t>(n - 1);
    const Mat q_inv = spd_inverse(Q, "Q");

    CmlParams p;
    p.horizon = n;
    p.evo_prev.resize(steps);
    p.evo_dest.resize(steps);
    p.evo_noise.resize(steps);

    // Walk k downward: power = F^{N-k}, C_{N|k} = sum_{i=0}^{N-k-1} F^i Q (F^i)'.
    Mat power = Mat::Identity(d, d);  // F^{N-k-1} entering each iteration
    Mat c = Mat::Zero(d, d);
    for (int k = n - 1; k >= 1; --k) {
        c = symmetrize(c + power * Q * power.transpose());
        power = F * power;
        require_invertible_controllability(c, k);

        const Mat c_inv_power = spd_solve(c, power, "C_{N|k}", k);
        Mat g = symmetrize(spd_inverse(symmetrize(q_inv + power.transpose() * c_inv_power), "G_k information", k));
        Mat g_dest = g * c_inv_power.transpose();
        Mat g_prev = F - g_dest * (power * F);

        const auto i = static_cast<std::size_t>(k - 1);
        p.evo_prev[i] = std::move(g_prev);
        p.evo_dest[i] = std::move(g_dest);
        p.evo_noise[i] = std::move(g);
    }
    // After the loop: power = F^{N-1}, c = C_{N|1}. Extend to the origin.
    c = symmetrize(c + power * Q * power.transpose());
    power = F * power;

    p.boundary.initial_cov = g0;
    p.boundary.final_from_initial = power;
    p.boundary.final_cov = c;
    p.mean_initial = Vec::Zero(d);
    p.mean_final = Vec::Zero(d);
    return p;
}

CmlParams set_endpoint_density(const CmlParams& params, const EndpointDensity& ep) {
    const SpdReport c0 = inspect_spd(ep.cov_initial);
    if (c0.square && (!c0.positive_definite() || c0.condition() > kMaxCondition))
        throw NumericError("set_endpoint_density: C_0 is singular");
    ep.validate();
    if (ep.mean_initial.size() != params.dim()) throw ConfigError("set_endpoint_density: dimension mismatch");

    CmlParams out = params;
    // G_{N,0} = C_{N,0} C_0^{-1}; solve C_0 X' = C_{N,0}' with C_0 symmetric.
    const Mat gain = spd_solve(ep.cov_initial, ep.cross_final_initial.transpose(), "C_0").transpose();
    out.boundary.final_from_initial = gain;
    out.boundary.final_cov = symmetrize(ep.cov_final - gain * ep.cross_final_initial.transpose());
    out.boundary.initial_cov = ep.cov_initial;
    out.mean_initial = ep.mean_initial;
    out.mean_final = ep.mean_final;
    return out;
}

Trajectory sample_ddt(const CmlParams& params, std::uint64_t seed, Noise noise) {
    Rng rng(seed);
    return sample_ddt(params, rng, noise);
}

Trajectory sample_ddt(const CmlParams& params, Rng& rng, Noise noise) {
    const int n = params.horizon;
    const bool sampled = noise == Noise::Sampled;
    Trajectory traj;
    traj.states.assign(static_cast<std::size_t>(n + 1), Vec());

    Vec e0 = Vec::Zero(params.dim());
    if (sampled) e0 = rng.correlated(covariance_factor(params.boundary.initial_cov, "G_0", 0));
    traj[0] = params.mean_initial + e0;

    traj[n] = params.mean_final + params.boundary.final_from_initial * e0;
    if (sampled) traj[n] += rng.correlated(covariance_factor(params.boundary.final_cov, "G_N", n));

    for (int k = 1; k <= n - 1; ++k) {
        traj[k] = params.prev(k) * traj[k - 1] + params.dest(k) * traj[n];
        if (sampled) traj[k] += rng.correlated(covariance_factor(params.noise(k), "G_k", k));
    }
    return traj;
}

}  // namespace cmguide
