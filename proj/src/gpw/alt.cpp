#include <cmath>

#include "spw/error.hpp"
#include "spw/gpw.hpp"

namespace spw {

AltVariant parse_alt_variant(const std::string& name) {
  if (name == "robinson") return AltVariant::RobinsonRegression;
  if (name == "half-weight") return AltVariant::HalfWeight;
  if (name == "one-sided-control") return AltVariant::OneSidedControlSafe;
  if (name == "overlap") return AltVariant::OverlapWeightWATE;
  fail(ErrorCode::InvalidArgument, "unknown estimator variant '" + name + "'");
}

std::string alt_variant_name(AltVariant v) {
  switch (v) {
    case AltVariant::RobinsonRegression: return "robinson";
    case AltVariant::HalfWeight: return "half-weight";
    case AltVariant::OneSidedControlSafe: return "one-sided-control";
    case AltVariant::OverlapWeightWATE: return "overlap";
  }
  return "unknown";
}

namespace {

GpwFit overlap_wate(const Eigen::MatrixXd& Z, const Eigen::ArrayXd& e, const Eigen::ArrayXd& w,
                    const Eigen::ArrayXd& y) {
  const double tol = 1e-12;
  require(Z.cols() == 1 && ((Z.array() - 1.0).abs() <= tol).all(),
          "overlap weighting estimates a single weighted average; use the basis '1'");
  const double n = static_cast<double>(Z.rows());
  Eigen::ArrayXd a1 = (1.0 - e) * w;
  Eigen::ArrayXd a0 = e * (1.0 - w);
  const double b1 = a1.sum() / n;
  const double b0 = a0.sum() / n;
  if (!(b1 > 0.0)) fail(ErrorCode::DenominatorZero, "overlap weighting: no treated mass");
  if (!(b0 > 0.0)) fail(ErrorCode::DenominatorZero, "overlap weighting: no control mass");
  const double m1 = (a1 * y).sum() / n / b1;
  const double m0 = (a0 * y).sum() / n / b0;
  // ratio delta method
  Eigen::ArrayXd infl = a1 * (y - m1) / b1 - a0 * (y - m0) / b0;
  GpwFit fit;
  fit.beta = Eigen::VectorXd::Constant(1, m1 - m0);
  fit.sigma = Eigen::MatrixXd::Constant(1, 1, infl.square().sum() / n);
  fit.n = static_cast<std::size_t>(Z.rows());
  fit.condition = 1.0;
  fit.method = "overlap";
  return fit;
}

}  // namespace

GpwFit alt_estimate(const Dataset& data, const std::vector<double>& e_col, const BasisSpec& basis,
                    AltVariant variant) {
  validate(data);
  const std::size_t n = data.size();
  check_propensity(e_col, n);
  for (int v : data.w) require(v == 0 || v == 1, "large-sample estimators need binary W");
  require(n > basis.dim(), "need more observations than basis terms");
  Eigen::MatrixXd Z = basis.evaluate(data);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::ArrayXd e(N), w(N), y(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    e[i] = e_col[k];
    w[i] = data.w[k];
    y[i] = data.y[k];
  }
  const Eigen::ArrayXd d = w - e;
  GpwFit fit;
  switch (variant) {
    case AltVariant::RobinsonRegression:
      fit = solve_linear_moment(Z, d.square().matrix(), (d * y).matrix(), "robinson");
      break;
    case AltVariant::HalfWeight:
      fit = solve_linear_moment(Z, (0.5 * (w * (1.0 - e) + e * (1.0 - w))).matrix(),
                                (d * y).matrix(), "half-weight");
      break;
    case AltVariant::OneSidedControlSafe:
      if (!(e.maxCoeff() < 1.0 - 1e-12))
        fail(ErrorCode::PropensityOnBoundary,
             "one-sided estimator needs every propensity below 1 - 1e-12");
      fit = solve_linear_moment(Z, w.matrix(), (d * y / (1.0 - e)).matrix(), "one-sided-control");
      break;
    case AltVariant::OverlapWeightWATE:
      fit = overlap_wate(Z, e, w, y);
      break;
  }
  fit.nu = std::nan("");
  fit.terms = basis.names();
  return fit;
}

}  // namespace spw
