#include "spw/gpw.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "spw/error.hpp"

namespace spw {

namespace {

constexpr double kMaxCondition = 1e12;

double condition_number(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0.0) return HUGE_VAL;
  return s(0) / s(s.size() - 1);
}

void check_condition(double cond, const std::string& method) {
  if (!(cond <= kMaxCondition))
    fail(ErrorCode::SingularDesign,
         method + ": design is singular or ill-conditioned (condition number " +
             std::to_string(cond) + ")");
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd Ainv = A.inverse();
  Eigen::MatrixXd S = Ainv * B * Ainv;
  return 0.5 * (S + S.transpose());
}

Eigen::MatrixXd meat(const Eigen::MatrixXd& Z, const Eigen::VectorXd& resid) {
  const double n = static_cast<double>(Z.rows());
  Eigen::MatrixXd Zr = Z.array().colwise() * resid.array();
  return Zr.transpose() * Zr / n;
}

struct Prepared {
  Eigen::MatrixXd Z;
  Eigen::VectorXd e, w, y;
};

Prepared prepare(const Dataset& data, const std::vector<double>& e, const BasisSpec& basis) {
  validate(data);
  const std::size_t n = data.size();
  check_propensity(e, n);
  for (int v : data.w) require(v == 0 || v == 1, "large-sample estimators need binary W");
  Prepared p;
  p.Z = basis.evaluate(data);
  require(n > basis.dim(), "need more observations than basis terms");
  const auto N = static_cast<Eigen::Index>(n);
  p.e.resize(N);
  p.w.resize(N);
  p.y.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    p.e[i] = e[k];
    p.w[i] = data.w[k];
    p.y[i] = data.y[k];
  }
  return p;
}

}  // namespace

void check_propensity(const std::vector<double>& e, std::size_t n) {
  require(e.size() == n, "propensity column length differs from dataset");
  for (std::size_t i = 0; i < n; ++i)
    if (!(e[i] > 0.0 && e[i] < 1.0))
      fail(ErrorCode::PropensityOnBoundary,
           "propensity " + std::to_string(e[i]) + " in row " + std::to_string(i + 1) +
               " is not strictly inside (0,1)",
           static_cast<std::int64_t>(i + 1));
}

GpwFit solve_linear_moment(const Eigen::MatrixXd& Z, const Eigen::VectorXd& D,
                           const Eigen::VectorXd& g, std::string method) {
  const double n = static_cast<double>(Z.rows());
  Eigen::MatrixXd A = Z.transpose() * (Z.array().colwise() * D.array()).matrix() / n;
  A = 0.5 * (A + A.transpose());
  Eigen::VectorXd b = Z.transpose() * g / n;
  const double cond = condition_number(A);
  check_condition(cond, method);
  GpwFit fit;
  fit.beta = A.colPivHouseholderQr().solve(b);
  Eigen::VectorXd resid = g - (D.array() * (Z * fit.beta).array()).matrix();
  fit.sigma = sandwich(A, meat(Z, resid));
  fit.n = static_cast<std::size_t>(Z.rows());
  fit.condition = cond;
  fit.method = std::move(method);
  return fit;
}

GpwFit gpw_estimate(const Dataset& data, const std::vector<double>& e, const BasisSpec& basis,
                    double nu) {
  require(std::isfinite(nu), "nu must be finite");
  Prepared p = prepare(data, e, basis);
  const double n = static_cast<double>(p.Z.rows());
  Eigen::ArrayXd v = p.e.array() * (1.0 - p.e.array());
  Eigen::ArrayXd zscale = v.pow(0.5 * (nu + 1.0));
  Eigen::ArrayXd yscale = v.pow(0.5 * (1.0 - nu));
  Eigen::MatrixXd Znu = (p.Z.array().colwise() * zscale).matrix();
  Eigen::VectorXd Ynu = ((p.w - p.e).array() * p.y.array() / yscale).matrix();

  Eigen::MatrixXd A = Znu.transpose() * Znu / n;
  const double cond = condition_number(A);
  check_condition(cond, "gpw");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Znu);
  if (qr.rank() < Znu.cols())
    fail(ErrorCode::SingularDesign, "gpw: transformed basis is rank deficient");

  GpwFit fit;
  fit.beta = qr.solve(Ynu);
  // estimating-equation residual (W-e)Y - e(1-e)Z'b, weighted by (e(1-e))^nu
  Eigen::ArrayXd raw = (p.w - p.e).array() * p.y.array() - v * (p.Z * fit.beta).array();
  Eigen::VectorXd resid = (v.pow(nu) * raw).matrix();
  fit.sigma = sandwich(A, meat(p.Z, resid));
  fit.nu = nu;
  fit.n = static_cast<std::size_t>(p.Z.rows());
  fit.condition = cond;
  fit.method = "gpw";
  fit.terms = basis.names();
  return fit;
}

GpwFit gpw_as_weighted_ipw(const Dataset& data, const std::vector<double>& e,
                           const BasisSpec& basis, double nu) {
  require(std::isfinite(nu), "nu must be finite");
  Prepared p = prepare(data, e, basis);
  Eigen::ArrayXd v = p.e.array() * (1.0 - p.e.array());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(v[i] > 1e-300))
      fail(ErrorCode::PropensityOnBoundary,
           "e(1-e) underflows in row " + std::to_string(i + 1), static_cast<std::int64_t>(i + 1));
  Eigen::VectorXd omega = v.pow(nu + 1.0).matrix();
  Eigen::VectorXd pseudo = ((p.w - p.e).array() * p.y.array() / v).matrix();
  Eigen::VectorXd g = (omega.array() * pseudo.array()).matrix();
  GpwFit fit = solve_linear_moment(p.Z, omega, g, "gpw_weighted_ipw");
  fit.nu = nu;
  fit.terms = basis.names();
  return fit;
}

Interval wald_ci(const GpwFit& fit, const Eigen::VectorXd& contrast, double level) {
  require(level > 0.0 && level < 1.0, "confidence level must lie in (0,1)");
  require(contrast.size() == fit.beta.size(), "contrast length differs from coefficient vector");
  require(fit.n > 0, "fit has no observations");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.sigma, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = std::max(0.0, ev.maxCoeff());
  if (ev.minCoeff() < -1e-10 * top || !ev.allFinite())
    fail(ErrorCode::NonPsdCovariance, "covariance matrix is not positive semidefinite");
  const double var = std::max(0.0, contrast.dot(fit.sigma * contrast));
  boost::math::normal norm;
  const double z = boost::math::quantile(norm, 0.5 + 0.5 * level);
  const double center = contrast.dot(fit.beta);
  const double half = z * std::sqrt(var / static_cast<double>(fit.n));
  return {center - half, center + half};
}

PateEstimate pate_estimate(const GpwFit& fit, const Dataset& data, const BasisSpec& basis) {
  Eigen::MatrixXd Z = basis.evaluate(data);
  require(Z.cols() == fit.beta.size(), "basis dimension differs from fit");
  Eigen::VectorXd zbar = Z.colwise().mean().transpose();
  PateEstimate out;
  out.estimate = fit.beta.dot(zbar);
  out.se = std::sqrt(std::max(0.0, zbar.dot(fit.sigma * zbar)) / static_cast<double>(fit.n));
  return out;
}

}  // namespace spw
