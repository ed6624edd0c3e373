#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "spw/data.hpp"

namespace spw {

/// CATE basis x -> Z(x). Either parsed from a term list such as
/// "1,x,x^2,a*b" over dataset columns, or supplied as a function.
class BasisSpec {
 public:
  using RowFn = std::function<Eigen::VectorXd(const Dataset&, std::size_t)>;

  static BasisSpec parse(const std::string& spec);
  static BasisSpec intercept();
  static BasisSpec from_function(std::vector<std::string> names, RowFn fn);

  std::size_t dim() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  /// n x d matrix of basis values; throws MissingColumn for unknown names.
  Eigen::MatrixXd evaluate(const Dataset& data) const;

 private:
  struct Factor {
    std::string column;
    int power = 1;
  };
  std::vector<std::string> names_;
  std::vector<std::vector<Factor>> terms_;
  RowFn fn_;
};

struct GpwFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd sigma;
  double nu = 1.0;
  std::size_t n = 0;
  /// 2-norm condition number of the weighted Gram matrix that was solved.
  double condition = 0.0;
  std::string method;
  std::vector<std::string> terms;
};

/// Solve E[D_i Z_i Z_i'] b = E[Z_i g_i] and return b with the sandwich
/// A^-1 B A^-1, B = E[Z Z' (g - D Z'b)^2]. Shared by the alternative
/// estimators; throws SingularDesign above condition 1e12.
GpwFit solve_linear_moment(const Eigen::MatrixXd& Z, const Eigen::VectorXd& D,
                           const Eigen::VectorXd& g, std::string method);

/// GPW estimator with index nu, computed as least squares on the
/// transformed variables Z_i(nu), Y_i(nu).
GpwFit gpw_estimate(const Dataset& data, const std::vector<double>& e,
                    const BasisSpec& basis, double nu = 1.0);
/// Same estimator written as weighted IPW: weights (e(1-e))^(nu+1) on the
/// pseudo-outcome (W-e)Y/(e(1-e)), solved from the normal equations.
GpwFit gpw_as_weighted_ipw(const Dataset& data, const std::vector<double>& e,
                           const BasisSpec& basis, double nu = 1.0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wald_ci(const GpwFit& fit, const Eigen::VectorXd& contrast, double level);

struct PateEstimate {
  double estimate = 0.0;
  double se = 0.0;
};

/// beta' mean(Z); the standard error treats mean(Z) as fixed (sample-average
/// target).
PateEstimate pate_estimate(const GpwFit& fit, const Dataset& data, const BasisSpec& basis);

enum class AltVariant { RobinsonRegression, HalfWeight, OneSidedControlSafe, OverlapWeightWATE };

AltVariant parse_alt_variant(const std::string& name);
std::string alt_variant_name(AltVariant v);

GpwFit alt_estimate(const Dataset& data, const std::vector<double>& e, const BasisSpec& basis,
                    AltVariant variant);

/// Propensity values checked to lie strictly inside (0,1).
void check_propensity(const std::vector<double>& e, std::size_t n);

}  // namespace spw
