#include "spw/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "spw/error.hpp"

namespace spw {

namespace {

constexpr double kConstraintTol = 1e-12;

void check_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0))
    fail(ErrorCode::NuisanceOutOfRange,
         std::string(what) + " = " + std::to_string(p) + " is outside (0,1)");
}

double stabilized_r(const ResidualKind& kind, const NuisancePoint& nuis) {
  double r = nuis.r.value_or(kind.r_default);
  check_probability(r, "stabilizer r");
  if (kind.bound_m) {
    double ratio = r * (1.0 - r) / (nuis.e * (1.0 - nuis.e));
    if (ratio > *kind.bound_m * (1.0 + 1e-12))
      fail(ErrorCode::StabilizerBoundViolated,
           "r(1-r)/(e(1-e)) = " + std::to_string(ratio) + " exceeds M = " +
               std::to_string(*kind.bound_m));
  }
  return r;
}

double cac_stabilizer(const ResidualKind& kind, const NuisancePoint& nuis) {
  double prod = 1.0;
  for (int w : kind.cac_levels) {
    if (static_cast<std::size_t>(w) >= nuis.phi.size())
      fail(ErrorCode::MissingNuisance, "phi is missing for treatment " + std::to_string(w));
    check_probability(nuis.phi[static_cast<std::size_t>(w)], "phi");
    prod *= nuis.phi[static_cast<std::size_t>(w)];
  }
  double s = nuis.stabilizer.value_or(prod);
  if (kind.bound_m && s > *kind.bound_m * prod * (1.0 + 1e-12))
    fail(ErrorCode::StabilizerBoundViolated,
         "stabilizer " + std::to_string(s) + " exceeds M times the product of phi");
  return s;
}

}  // namespace

void GnpwSpec::validate() const {
  require(nu1 >= 0.0 && nu2 >= 0.0, "GNPW exponents must be non-negative");
  require(std::fabs(theta[0] + theta[1] - 1.0) <= kConstraintTol,
          "GNPW coefficients need theta1 + theta2 = 1");
  require(std::fabs(theta[2] + theta[3] + 1.0) <= kConstraintTol,
          "GNPW coefficients need theta3 + theta4 = -1");
}

std::string residual_tag_name(ResidualTag tag) {
  switch (tag) {
    case ResidualTag::Gnpw: return "gnpw";
    case ResidualTag::OneSidedControl: return "one_sided_control";
    case ResidualTag::OneSidedTreated: return "one_sided_treated";
    case ResidualTag::WeightedAipw: return "weighted_aipw";
    case ResidualTag::StabilizedAipw: return "stabilized_aipw";
    case ResidualTag::HybridRegion: return "hybrid_region";
    case ResidualTag::RobinsonClassic: return "robinson";
    case ResidualTag::SrpNoPropensity: return "srp_no_propensity";
    case ResidualTag::MultivaluedCac: return "cac";
    case ResidualTag::MultivaluedCqr: return "cqr";
  }
  return "unknown";
}

ResidualKind ResidualKind::make_gnpw(const GnpwSpec& spec) {
  ResidualKind k;
  k.tag = ResidualTag::Gnpw;
  k.gnpw = spec;
  k.validate();
  return k;
}

ResidualKind ResidualKind::simple(ResidualTag tag) {
  ResidualKind k;
  k.tag = tag;
  k.validate();
  return k;
}

ResidualKind ResidualKind::stabilized(double r, std::optional<double> m) {
  ResidualKind k;
  k.tag = ResidualTag::StabilizedAipw;
  k.r_default = r;
  k.bound_m = m;
  k.validate();
  return k;
}

ResidualKind ResidualKind::srp(double theta1, double theta2) {
  ResidualKind k;
  k.tag = ResidualTag::SrpNoPropensity;
  k.srp_theta = {theta1, theta2};
  k.validate();
  return k;
}

ResidualKind ResidualKind::cac(std::vector<int> levels, std::vector<double> kappa,
                               std::optional<double> m) {
  ResidualKind k;
  k.tag = ResidualTag::MultivaluedCac;
  k.cac_levels = std::move(levels);
  k.kappa = std::move(kappa);
  k.bound_m = m;
  k.validate();
  return k;
}

ResidualKind ResidualKind::cqr(double v, int level) {
  ResidualKind k;
  k.tag = ResidualTag::MultivaluedCqr;
  k.quantile = v;
  k.cqr_level = level;
  k.validate();
  return k;
}

void ResidualKind::validate() const {
  switch (tag) {
    case ResidualTag::Gnpw:
      gnpw.validate();
      break;
    case ResidualTag::StabilizedAipw:
      require(r_default > 0.0 && r_default < 1.0, "stabilizer r must lie in (0,1)");
      if (bound_m) require(*bound_m > 0.0, "bound M must be positive");
      break;
    case ResidualTag::SrpNoPropensity:
      require(srp_theta[0] >= 0.0 && srp_theta[1] >= 0.0,
              "SRP coefficients must be non-negative");
      require(srp_theta[0] + srp_theta[1] > 0.0, "SRP coefficients cannot both be zero");
      break;
    case ResidualTag::MultivaluedCac: {
      require(!cac_levels.empty(), "CAC needs at least one treatment");
      require(cac_levels.size() == kappa.size(), "CAC kappa and treatment list differ in length");
      auto sorted = cac_levels;
      std::sort(sorted.begin(), sorted.end());
      require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
              "CAC treatments must be distinct");
      require(sorted.front() >= 0, "CAC treatments must be non-negative");
      require(std::any_of(kappa.begin(), kappa.end(), [](double v) { return v != 0.0; }),
              "CAC kappa needs a nonzero entry");
      if (bound_m) require(*bound_m > 0.0, "bound M must be positive");
      break;
    }
    case ResidualTag::MultivaluedCqr:
      require(quantile > 0.0 && quantile < 1.0, "CQR quantile level must lie in (0,1)");
      require(cqr_level >= 0, "CQR treatment must be non-negative");
      break;
    default:
      break;
  }
}

double eval_cac_residual(const ResidualKind& kind, const Observation& obs, double theta,
                         const NuisancePoint& nuis) {
  require(kind.tag == ResidualTag::MultivaluedCac, "not a CAC residual kind");
  const double s = cac_stabilizer(kind, nuis);
  double sum = 0.0;
  for (std::size_t j = 0; j < kind.cac_levels.size(); ++j) {
    auto w = static_cast<std::size_t>(kind.cac_levels[j]);
    if (w >= nuis.gamma.size())
      fail(ErrorCode::MissingNuisance, "gamma is missing for treatment " + std::to_string(w));
    const double g = nuis.gamma[w];
    double term = g;
    if (obs.w == kind.cac_levels[j]) term += (obs.y - g) / nuis.phi[w];
    sum += kind.kappa[j] * term;
  }
  return s * (sum - theta);
}

double eval_cac_residual_plain(const ResidualKind& kind, const Observation& obs,
                               double theta, const NuisancePoint& nuis) {
  require(kind.tag == ResidualTag::MultivaluedCac, "not a CAC residual kind");
  const double s = cac_stabilizer(kind, nuis);
  double sum = 0.0;
  for (std::size_t j = 0; j < kind.cac_levels.size(); ++j)
    if (obs.w == kind.cac_levels[j])
      sum += kind.kappa[j] * obs.y / nuis.phi[static_cast<std::size_t>(obs.w)];
  return s * (sum - theta);
}

double eval_cqr_residual(double v, int level, const Observation& obs, double q,
                         const NuisancePoint& nuis) {
  require(v > 0.0 && v < 1.0, "CQR quantile level must lie in (0,1)");
  auto w = static_cast<std::size_t>(level);
  if (level < 0 || w >= nuis.phi.size() || w >= nuis.gamma.size())
    fail(ErrorCode::MissingNuisance, "phi/gamma missing for treatment " + std::to_string(level));
  const double phi = nuis.phi[w];
  const double gamma = nuis.gamma[w];
  check_probability(phi, "phi");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    fail(ErrorCode::NuisanceOutOfRange, "gamma = " + std::to_string(gamma) + " is outside [0,1]");
  double ind = obs.w == level ? ((obs.y <= q ? 1.0 : 0.0) - gamma) : 0.0;
  return ind + phi * (gamma - v);
}

double eval_residual(const ResidualKind& kind, const Observation& obs, double tau,
                     const NuisancePoint& nuis) {
  if (kind.tag == ResidualTag::MultivaluedCac) return eval_cac_residual(kind, obs, tau, nuis);
  if (kind.tag == ResidualTag::MultivaluedCqr)
    return eval_cqr_residual(kind.quantile, kind.cqr_level, obs, tau, nuis);

  require(obs.w == 0 || obs.w == 1, "binary residual kinds need W in {0,1}");
  const double W = obs.w;
  const double Y = obs.y;
  const double mu0 = nuis.mu0;
  const double mu1 = nuis.mu1;

  if (kind.tag == ResidualTag::SrpNoPropensity) {
    const double t1 = kind.srp_theta[0];
    const double t2 = kind.srp_theta[1];
    return (t1 * W + t2 * (W - 1.0)) * tau - (t1 + t2) * Y + t1 * mu0 + t2 * mu1;
  }

  const double e = nuis.e;
  check_probability(e, "propensity e");
  const double d = W - e;

  switch (kind.tag) {
    case ResidualTag::Gnpw: {
      const auto& g = kind.gnpw;
      const auto& th = g.theta;
      const double wgt = std::pow(e, g.nu1) * std::pow(1.0 - e, g.nu2);
      const double s = th[0] * W + th[1] * e + th[2] * W * e + th[3] * e * e;
      const double centered = Y - mu0 - (th[1] + th[3] * e) * (mu1 - mu0);
      return wgt * (s * tau - d * centered);
    }
    case ResidualTag::OneSidedControl:
      return W * tau - d * (Y - mu0) / (1.0 - e);
    case ResidualTag::OneSidedTreated:
      return (1.0 - W) * tau - d * (Y - mu1) / e;
    case ResidualTag::WeightedAipw: {
      const double v = e * (1.0 - e);
      return v * tau - v * (mu1 - mu0) - d * (Y - W * mu1 - (1.0 - W) * mu0);
    }
    case ResidualTag::StabilizedAipw: {
      const double r = stabilized_r(kind, nuis);
      return r * (1.0 - r) *
             (tau - (mu1 - mu0) - d * (Y - W * mu1 - (1.0 - W) * mu0) / (e * (1.0 - e)));
    }
    case ResidualTag::HybridRegion: {
      if (!nuis.r) fail(ErrorCode::MissingNuisance, "hybrid residual needs the region function r");
      const double r = *nuis.r;
      if (r != 0.0 && r != 1.0)
        fail(ErrorCode::NuisanceOutOfRange, "region function r must be 0 or 1");
      const double s = W * r + (1.0 - W) * (1.0 - r);
      const double st = r / (1.0 - e) + (1.0 - r) / e;
      return s * tau - st * d * (Y - r * mu0 - (1.0 - r) * mu1);
    }
    case ResidualTag::RobinsonClassic: {
      if (!nuis.eta) fail(ErrorCode::MissingNuisance, "Robinson residual needs eta = E[Y|X]");
      return d * d * tau - d * (Y - *nuis.eta);
    }
    default:
      break;
  }
  fail(ErrorCode::InvalidArgument, "unhandled residual kind");
}

double eval_srp_triple(const SrpTriple& triple, std::size_t x, const Observation& obs,
                       double tau) {
  return triple.psi1(x, obs.w) * tau - triple.psi2(x, obs.w) * obs.y - triple.psi3(x, obs.w);
}

}  // namespace spw
