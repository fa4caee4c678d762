#pragma once

#include <initializer_list>
#include <string_view>

#include <Eigen/Dense>

namespace cmguide {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Absolute symmetry tolerance, scaled by max(1, max|A_ij|).
inline constexpr double kSymmetryTol = 1e-10;
/// Matrices whose 2-norm condition number exceeds this are rejected as near-singular.
inline constexpr double kMaxCondition = 1e12;

struct SpdReport {
    bool square = false;
    bool symmetric = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;

    bool positive_definite() const { return square && symmetric && min_eigenvalue > 0.0; }
    double condition() const;
};

SpdReport inspect_spd(const Mat& a);

bool is_symmetric(const Mat& a, double tol = kSymmetryTol);

/// Throws ConfigError unless `a` is symmetric, positive definite and not near-singular.
void require_spd(const Mat& a, std::string_view what, int step = -1);

/// (A + A') / 2
Mat symmetrize(const Mat& a);

/// Solves A X = B for SPD A by Cholesky. Throws NumericError on failure.
Mat spd_solve(const Mat& a, const Mat& b, std::string_view what, int step = -1);

/// A^{-1} for SPD A, for the places where a formula needs the inverse operator itself.
Mat spd_inverse(const Mat& a, std::string_view what, int step = -1);

/// Returns L with L L' = cov. Cholesky when possible, otherwise a symmetric
/// eigen square root (cov only PSD). Throws NumericError for indefinite input.
Mat covariance_factor(const Mat& cov, std::string_view what = "covariance", int step = -1);

/// ||a - b||_F / ||b||_F, or ||a - b||_F when b vanishes.
double relative_error(const Mat& a, const Mat& b);

Mat block_diag(std::initializer_list<Mat> blocks);

Mat matrix_power(const Mat& a, int exponent);

/// True when b - a is PSD up to `tol` (a ≼ b in the Loewner order).
bool loewner_leq(const Mat& a, const Mat& b, double tol = 1e-10);

}  // namespace cmguide
