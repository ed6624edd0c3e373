#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spw {

/// Exponents and polynomial coefficients of a generalized non-inverse
/// probability weighting residual.
struct GnpwSpec {
  double nu1 = 0.0;
  double nu2 = 0.0;
  std::array<double, 4> theta{0.0, 1.0, 0.0, -1.0};

  /// Throws InvalidArgument unless nu >= 0, theta1 + theta2 = 1 and
  /// theta3 + theta4 = -1 (within 1e-12).
  void validate() const;
};

enum class ResidualTag {
  Gnpw,
  OneSidedControl,
  OneSidedTreated,
  WeightedAipw,
  StabilizedAipw,
  HybridRegion,
  RobinsonClassic,
  SrpNoPropensity,
  MultivaluedCac,
  MultivaluedCqr,
};

std::string residual_tag_name(ResidualTag tag);

struct ResidualKind {
  ResidualTag tag = ResidualTag::Gnpw;
  GnpwSpec gnpw;
  /// Stabilizer value used by StabilizedAipw when the nuisance set has no r.
  double r_default = 0.5;
  /// Optional bound M on r(1-r)/(e(1-e)) (stabilized) or S/prod(phi) (CAC).
  std::optional<double> bound_m;
  std::array<double, 2> srp_theta{1.0, 0.0};
  /// CAC: treatments entering the contrast and their weights.
  std::vector<int> cac_levels;
  std::vector<double> kappa;
  /// CQR: quantile level and treatment.
  double quantile = 0.5;
  int cqr_level = 1;

  static ResidualKind make_gnpw(const GnpwSpec& spec);
  static ResidualKind simple(ResidualTag tag);
  static ResidualKind stabilized(double r = 0.5, std::optional<double> m = std::nullopt);
  static ResidualKind srp(double theta1, double theta2);
  static ResidualKind cac(std::vector<int> levels, std::vector<double> kappa,
                          std::optional<double> m = std::nullopt);
  static ResidualKind cqr(double v, int level);

  /// Tag-specific parameter checks; throws InvalidArgument.
  void validate() const;
  bool binary() const noexcept {
    return tag != ResidualTag::MultivaluedCac && tag != ResidualTag::MultivaluedCqr;
  }
};

struct Observation {
  double y = 0.0;
  int w = 0;
};

/// Nuisance values at one covariate point. phi and gamma are indexed by
/// treatment and used by the multivalued kinds; for CQR gamma[w] is the
/// working conditional CDF evaluated at the hypothesized quantile.
struct NuisancePoint {
  double e = 0.5;
  double mu0 = 0.0;
  double mu1 = 0.0;
  std::optional<double> eta;
  std::optional<double> r;
  std::vector<double> phi;
  std::vector<double> gamma;
  /// CAC stabilizer S(x); defaults to the product of phi over the contrast.
  std::optional<double> stabilizer;
};

/// Nuisance functions on the support of a DiscreteDesign.
using NuisanceSet = std::vector<NuisancePoint>;

/// Evaluates the residual at one observation. tau is the CATE value for the
/// binary kinds, theta(x) for CAC and the hypothesized quantile for CQR.
double eval_residual(const ResidualKind& kind, const Observation& obs, double tau,
                     const NuisancePoint& nuis);

double eval_cac_residual(const ResidualKind& kind, const Observation& obs, double theta,
                         const NuisancePoint& nuis);
/// Non-augmented form S * (sum kappa_w 1{W=w} Y / phi_w - theta); separate
/// code path used to cross-check eval_cac_residual with gamma = 0.
double eval_cac_residual_plain(const ResidualKind& kind, const Observation& obs,
                               double theta, const NuisancePoint& nuis);
double eval_cqr_residual(double v, int level, const Observation& obs, double q,
                         const NuisancePoint& nuis);

/// Finite-support outcome law per (x, w).
struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

struct DesignPoint {
  double mass = 0.0;
  std::vector<double> lambda;
  std::vector<std::vector<Atom>> outcomes;
};

/// Covariate distribution with finite support and exact conditional laws,
/// used for analytic conditional expectations.
struct DiscreteDesign {
  std::vector<DesignPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  int levels() const noexcept {
    return points.empty() ? 0 : static_cast<int>(points.front().lambda.size());
  }
  double mu(int w, std::size_t x) const;
  double tau(std::size_t x) const { return mu(1, x) - mu(0, x); }
  double cdf(int w, std::size_t x, double q) const;
  /// Smallest atom value q with cdf(q) >= v.
  double quantile(int w, std::size_t x, double v) const;

  /// Masses sum to 1, lambda rows sum to 1 and lie in (0,1), atom
  /// probabilities sum to 1.
  void validate() const;

  /// True nuisance values; eta = E[Y|X], phi = lambda, gamma = mu (CAC) or
  /// the CDF at the true quantile (CQR kinds, via truth_for).
  NuisancePoint truth(std::size_t x) const;
  NuisanceSet truth() const;
};

/// Truth nuisances adjusted for a kind (CQR gamma at q, hybrid region r).
NuisanceSet truth_for(const ResidualKind& kind, const DiscreteDesign& design,
                      const std::vector<double>& region = {});
/// True target at x: tau(x), theta(x) = sum kappa mu, or the true quantile.
double true_target(const ResidualKind& kind, const DiscreteDesign& design, std::size_t x);

/// Exact E[Psi | X = x] by summing over treatments and outcome atoms.
double conditional_mean(const ResidualKind& kind, std::size_t x, double tau_tilde,
                        const NuisancePoint& nuis, const DiscreteDesign& design);

/// Perturbation direction. Vectors are per treatment for the multivalued
/// kinds and may be left empty.
struct Direction {
  double h_e = 0.0;
  double h_mu0 = 0.0;
  double h_mu1 = 0.0;
  double h_eta = 0.0;
  std::vector<double> h_phi;
  std::vector<double> h_gamma;
};

NuisancePoint perturb(const NuisancePoint& nuis, const Direction& dir, double t);

/// Central difference [E(h) - E(-h)] / (2h) of the conditional mean along
/// dir. Throws PerturbationLeavesDomain if a probability would leave (0,1)
/// for |t| <= 2h.
double gateaux_derivative(const ResidualKind& kind, std::size_t x, double tau,
                          const NuisancePoint& nuis, const Direction& dir,
                          const DiscreteDesign& design, double h = 1e-4);

struct DrRow {
  double moment_truth = 0.0;
  double moment_true_e_wrong_mu = 0.0;
  double moment_wrong_e_true_mu = 0.0;
  double moment_both_wrong = 0.0;
};

/// Conditional means at each support point under the four combinations of
/// correct and misspecified nuisances. "e" means the propensity-like part
/// (e, phi) and "mu" the outcome part (mu0, mu1, eta, gamma). For
/// RobinsonClassic a wrong-mu point without eta gets eta computed from the
/// wrong mu and the true e.
std::vector<DrRow> dr_probe(const ResidualKind& kind, const DiscreteDesign& design,
                            const std::vector<double>& tau_tilde, const NuisanceSet& truth,
                            const NuisanceSet& wrong);

/// User-supplied residual Psi = Psi1 * tau - Psi2 * Y - Psi3 with each part
/// a function of (support point, treatment).
struct SrpTriple {
  std::function<double(std::size_t, int)> psi1;
  std::function<double(std::size_t, int)> psi2;
  std::function<double(std::size_t, int)> psi3;
};

double eval_srp_triple(const SrpTriple& triple, std::size_t x, const Observation& obs,
                       double tau);

struct SrpConditionRow {
  double mean_psi1 = 0.0;
  /// E[Psi1|X] tau - E[Psi2 mu(W,X)|X] - E[Psi3|X]
  double balance_gap = 0.0;
  bool holds = false;
};

/// Evaluates the two defining conditions at each support point.
std::vector<SrpConditionRow> srp_check(const SrpTriple& triple, const DiscreteDesign& design,
                                       double tol = 1e-12);

}  // namespace spw
