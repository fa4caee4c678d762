#include "cmguide/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmguide/errors.hpp"

namespace cmguide {

double SpdReport::condition() const {
    if (min_eigenvalue <= 0.0) return std::numeric_limits<double>::infinity();
    return max_eigenvalue / min_eigenvalue;
}

bool is_symmetric(const Mat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    if (a.size() == 0) return true;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

SpdReport inspect_spd(const Mat& a) {
    SpdReport r;
    r.square = a.rows() == a.cols() && a.rows() > 0;
    if (!r.square) return r;
    r.symmetric = is_symmetric(a);
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(a), Eigen::EigenvaluesOnly);
    r.min_eigenvalue = eig.eigenvalues().minCoeff();
    r.max_eigenvalue = eig.eigenvalues().maxCoeff();
    return r;
}

namespace {

std::string label(std::string_view what, int step) {
    std::string s(what);
    if (step >= 0) s += " (k=" + std::to_string(step) + ")";
    return s;
}

}  // namespace

void require_spd(const Mat& a, std::string_view what, int step) {
    const SpdReport r = inspect_spd(a);
    if (!r.square) throw ConfigError(label(what, step) + ": matrix is not square");
    if (!r.symmetric) throw ConfigError(label(what, step) + ": matrix is not symmetric");
    if (!(r.min_eigenvalue > 0.0)) throw ConfigError(label(what, step) + ": matrix is not positive definite");
    if (r.condition() > kMaxCondition)
        throw ConfigError(label(what, step) + ": matrix is near-singular (condition " +
                          std::to_string(r.condition()) + ")");
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat spd_solve(const Mat& a, const Mat& b, std::string_view what, int step) {
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + ": Cholesky factorization failed", step);
    return llt.solve(b);
}

Mat spd_inverse(const Mat& a, std::string_view what, int step) {
    return spd_solve(a, Mat::Identity(a.rows(), a.cols()), what, step);
}

Mat covariance_factor(const Mat& cov, std::string_view what, int step) {
    if (cov.size() == 0) return cov;
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(cov));
    if (eig.info() != Eigen::Success) throw NumericError(std::string(what) + ": eigen decomposition failed", step);
    const Vec& lambda = eig.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda.minCoeff() < -1e-10 * scale)
        throw NumericError(std::string(what) + ": covariance is indefinite", step);
    const Vec root = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

double relative_error(const Mat& a, const Mat& b) {
    const double diff = (a - b).norm();
    const double ref = b.norm();
    return ref > 0.0 ? diff / ref : diff;
}

Mat block_diag(std::initializer_list<Mat> blocks) {
    Eigen::Index rows = 0, cols = 0;
    for (const Mat& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Mat out = Mat::Zero(rows, cols);
    Eigen::Index r = 0, c = 0;
    for (const Mat& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

Mat matrix_power(const Mat& a, int exponent) {
    Mat result = Mat::Identity(a.rows(), a.cols());
    for (int i = 0; i < exponent; ++i) result = a * result;
    return result;
}

bool loewner_leq(const Mat& a, const Mat& b, double tol) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(b - a), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
    return eig.eigenvalues().minCoeff() >= -tol * scale;
}

}  // namespace cmguide
