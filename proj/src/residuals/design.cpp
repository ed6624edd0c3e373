#include <algorithm>
#include <cmath>

#include "spw/error.hpp"
#include "spw/residuals.hpp"

namespace spw {

double DiscreteDesign::mu(int w, std::size_t x) const {
  require(x < points.size(), "support point out of range");
  const auto& atoms = points[x].outcomes.at(static_cast<std::size_t>(w));
  double m = 0.0;
  for (const auto& a : atoms) m += a.prob * a.value;
  return m;
}

double DiscreteDesign::cdf(int w, std::size_t x, double q) const {
  require(x < points.size(), "support point out of range");
  double c = 0.0;
  for (const auto& a : points[x].outcomes.at(static_cast<std::size_t>(w)))
    if (a.value <= q) c += a.prob;
  return c;
}

double DiscreteDesign::quantile(int w, std::size_t x, double v) const {
  require(x < points.size(), "support point out of range");
  auto atoms = points[x].outcomes.at(static_cast<std::size_t>(w));
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  double c = 0.0;
  for (const auto& a : atoms) {
    c += a.prob;
    if (c >= v - 1e-12) return a.value;
  }
  return atoms.back().value;
}

void DiscreteDesign::validate() const {
  require(!points.empty(), "design needs at least one support point");
  const std::size_t L = points.front().lambda.size();
  require(L >= 2, "design needs at least two treatments");
  double mass = 0.0;
  for (const auto& p : points) {
    require(p.mass > 0.0, "support masses must be positive");
    mass += p.mass;
    require(p.lambda.size() == L && p.outcomes.size() == L,
            "every support point needs one lambda and one outcome law per treatment");
    double s = 0.0;
    for (double l : p.lambda) {
      require(l > 0.0 && l < 1.0, "assignment probabilities must lie in (0,1)");
      s += l;
    }
    require(std::fabs(s - 1.0) <= 1e-12, "assignment probabilities must sum to 1");
    for (const auto& atoms : p.outcomes) {
      require(!atoms.empty(), "outcome law needs at least one atom");
      double ps = 0.0;
      for (const auto& a : atoms) {
        require(a.prob >= 0.0 && std::isfinite(a.value), "invalid outcome atom");
        ps += a.prob;
      }
      require(std::fabs(ps - 1.0) <= 1e-12, "outcome atom probabilities must sum to 1");
    }
  }
  require(std::fabs(mass - 1.0) <= 1e-12, "support masses must sum to 1");
}

NuisancePoint DiscreteDesign::truth(std::size_t x) const {
  require(x < points.size(), "support point out of range");
  const auto& p = points[x];
  NuisancePoint n;
  n.e = p.lambda.at(1);
  n.mu0 = mu(0, x);
  n.mu1 = mu(1, x);
  double eta = 0.0;
  for (std::size_t w = 0; w < p.lambda.size(); ++w) {
    double m = mu(static_cast<int>(w), x);
    eta += p.lambda[w] * m;
    n.gamma.push_back(m);
  }
  n.eta = eta;
  n.phi = p.lambda;
  return n;
}

NuisanceSet DiscreteDesign::truth() const {
  NuisanceSet out;
  for (std::size_t x = 0; x < points.size(); ++x) out.push_back(truth(x));
  return out;
}

NuisanceSet truth_for(const ResidualKind& kind, const DiscreteDesign& design,
                      const std::vector<double>& region) {
  NuisanceSet out = design.truth();
  for (std::size_t x = 0; x < out.size(); ++x) {
    if (kind.tag == ResidualTag::MultivaluedCqr)
      for (std::size_t w = 0; w < out[x].gamma.size(); ++w) {
        int wi = static_cast<int>(w);
        out[x].gamma[w] = design.cdf(wi, x, design.quantile(wi, x, kind.quantile));
      }
    if (kind.tag == ResidualTag::HybridRegion && x < region.size()) out[x].r = region[x];
  }
  return out;
}

double true_target(const ResidualKind& kind, const DiscreteDesign& design, std::size_t x) {
  switch (kind.tag) {
    case ResidualTag::MultivaluedCac: {
      double th = 0.0;
      for (std::size_t j = 0; j < kind.cac_levels.size(); ++j)
        th += kind.kappa[j] * design.mu(kind.cac_levels[j], x);
      return th;
    }
    case ResidualTag::MultivaluedCqr:
      return design.quantile(kind.cqr_level, x, kind.quantile);
    default:
      return design.tau(x);
  }
}

double conditional_mean(const ResidualKind& kind, std::size_t x, double tau_tilde,
                        const NuisancePoint& nuis, const DiscreteDesign& design) {
  require(x < design.size(), "support point out of range");
  if (kind.binary()) require(design.levels() == 2, "binary residual kinds need a binary design");
  const auto& p = design.points[x];
  double total = 0.0;
  for (std::size_t w = 0; w < p.lambda.size(); ++w) {
    double inner = 0.0;
    for (const auto& a : p.outcomes[w])
      inner += a.prob * eval_residual(kind, {a.value, static_cast<int>(w)}, tau_tilde, nuis);
    total += p.lambda[w] * inner;
  }
  return total;
}

NuisancePoint perturb(const NuisancePoint& nuis, const Direction& dir, double t) {
  NuisancePoint p = nuis;
  p.e += t * dir.h_e;
  p.mu0 += t * dir.h_mu0;
  p.mu1 += t * dir.h_mu1;
  if (p.eta) *p.eta += t * dir.h_eta;
  for (std::size_t w = 0; w < dir.h_phi.size() && w < p.phi.size(); ++w)
    p.phi[w] += t * dir.h_phi[w];
  for (std::size_t w = 0; w < dir.h_gamma.size() && w < p.gamma.size(); ++w)
    p.gamma[w] += t * dir.h_gamma[w];
  return p;
}

double gateaux_derivative(const ResidualKind& kind, std::size_t x, double tau,
                          const NuisancePoint& nuis, const Direction& dir,
                          const DiscreteDesign& design, double h) {
  require(h > 0.0 && h <= 1e-2, "finite-difference step must lie in (0, 1e-2]");
  for (double t : {-2.0 * h, 2.0 * h}) {
    NuisancePoint p = perturb(nuis, dir, t);
    bool ok = true;
    if (kind.tag != ResidualTag::SrpNoPropensity && kind.binary())
      ok = p.e > 0.0 && p.e < 1.0;
    for (double v : p.phi) ok = ok && v > 0.0 && v < 1.0;
    if (kind.tag == ResidualTag::MultivaluedCqr)
      for (double v : p.gamma) ok = ok && v >= 0.0 && v <= 1.0;
    if (!ok)
      fail(ErrorCode::PerturbationLeavesDomain,
           "perturbed nuisance leaves its domain at support point " + std::to_string(x),
           static_cast<std::int64_t>(x));
  }
  const double up = conditional_mean(kind, x, tau, perturb(nuis, dir, h), design);
  const double down = conditional_mean(kind, x, tau, perturb(nuis, dir, -h), design);
  return (up - down) / (2.0 * h);
}

std::vector<DrRow> dr_probe(const ResidualKind& kind, const DiscreteDesign& design,
                            const std::vector<double>& tau_tilde, const NuisanceSet& truth,
                            const NuisanceSet& wrong) {
  const std::size_t K = design.size();
  require(tau_tilde.size() == K && truth.size() == K && wrong.size() == K,
          "probe inputs need one entry per support point");
  std::vector<DrRow> rows(K);
  for (std::size_t x = 0; x < K; ++x) {
    const NuisancePoint& T = truth[x];
    const NuisancePoint& B = wrong[x];

    NuisancePoint wrong_mu = T;
    wrong_mu.mu0 = B.mu0;
    wrong_mu.mu1 = B.mu1;
    if (!B.gamma.empty()) wrong_mu.gamma = B.gamma;
    wrong_mu.eta = B.eta ? *B.eta : T.e * B.mu1 + (1.0 - T.e) * B.mu0;

    NuisancePoint wrong_e = T;
    wrong_e.e = B.e;
    if (!B.phi.empty()) wrong_e.phi = B.phi;

    NuisancePoint both = wrong_mu;
    both.e = B.e;
    if (!B.phi.empty()) both.phi = B.phi;
    both.eta = B.eta ? *B.eta : B.e * B.mu1 + (1.0 - B.e) * B.mu0;

    const double t = tau_tilde[x];
    rows[x].moment_truth = conditional_mean(kind, x, t, T, design);
    rows[x].moment_true_e_wrong_mu = conditional_mean(kind, x, t, wrong_mu, design);
    rows[x].moment_wrong_e_true_mu = conditional_mean(kind, x, t, wrong_e, design);
    rows[x].moment_both_wrong = conditional_mean(kind, x, t, both, design);
  }
  return rows;
}

std::vector<SrpConditionRow> srp_check(const SrpTriple& triple, const DiscreteDesign& design,
                                       double tol) {
  require(triple.psi1 && triple.psi2 && triple.psi3, "SRP triple needs all three parts");
  std::vector<SrpConditionRow> rows(design.size());
  for (std::size_t x = 0; x < design.size(); ++x) {
    const auto& p = design.points[x];
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, scale = 1.0;
    for (std::size_t w = 0; w < p.lambda.size(); ++w) {
      int wi = static_cast<int>(w);
      double mw = design.mu(wi, x);
      m1 += p.lambda[w] * triple.psi1(x, wi);
      m2 += p.lambda[w] * triple.psi2(x, wi) * mw;
      m3 += p.lambda[w] * triple.psi3(x, wi);
      scale = std::max({scale, std::fabs(triple.psi2(x, wi) * mw), std::fabs(triple.psi3(x, wi))});
    }
    double tau = design.levels() >= 2 ? design.tau(x) : 0.0;
    rows[x].mean_psi1 = m1;
    rows[x].balance_gap = m1 * tau - m2 - m3;
    rows[x].holds = std::fabs(m1) > tol && std::fabs(rows[x].balance_gap) <= tol * scale;
  }
  return rows;
}

}  // namespace spw
