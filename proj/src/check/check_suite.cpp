#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "spw/check.hpp"
#include "spw/error.hpp"

namespace spw {

namespace {

std::vector<Atom> two_atoms(double lo, double hi) { return {{lo, 0.5}, {hi, 0.5}}; }

std::vector<Atom> three_atoms(double a, double b, double c) {
  return {{a, 0.25}, {b, 0.25}, {c, 0.5}};
}

DesignPoint binary_point(double mass, double e, std::vector<Atom> y0, std::vector<Atom> y1) {
  return {mass, {1.0 - e, e}, {std::move(y0), std::move(y1)}};
}

std::vector<double> region_of(const DiscreteDesign& d) {
  std::vector<double> r;
  for (const auto& p : d.points) r.push_back(p.lambda[1] < 0.5 ? 1.0 : 0.0);
  return r;
}

DesignFixture finish(std::string name, DiscreteDesign d) {
  d.validate();
  auto region = region_of(d);
  return {std::move(name), std::move(d), std::move(region)};
}

constexpr double kMomentTol = 1e-12;
constexpr double kOrthTol = 1e-6;
constexpr double kDrTol = 1e-12;
constexpr double kStep = 1e-4;
// reported non-orthogonality must be at least this large
constexpr double kNonOrthFloor = 1e-3;

bool applies(const ResidualKind& kind, const DesignFixture& fx) {
  const int L = fx.design.levels();
  switch (kind.tag) {
    case ResidualTag::MultivaluedCac:
      return *std::max_element(kind.cac_levels.begin(), kind.cac_levels.end()) < L;
    case ResidualTag::MultivaluedCqr:
      return kind.cqr_level < L;
    default:
      return L == 2;
  }
}

std::vector<const DesignFixture*> fixtures_for(const ResidualKind& kind,
                                               const std::vector<DesignFixture>& all) {
  std::vector<const DesignFixture*> out;
  for (const auto& fx : all)
    if (applies(kind, fx)) out.push_back(&fx);
  return out;
}

double point_propensity(const ResidualKind& kind, const DesignFixture& fx, std::size_t x) {
  const auto& lam = fx.design.points[x].lambda;
  if (kind.tag == ResidualTag::MultivaluedCac) {
    double lo = 1.0;
    for (int w : kind.cac_levels) lo = std::min(lo, lam[static_cast<std::size_t>(w)]);
    return lo;
  }
  if (kind.tag == ResidualTag::MultivaluedCqr) return lam[static_cast<std::size_t>(kind.cqr_level)];
  return lam[1];
}

}  // namespace

std::vector<DesignFixture> binary_fixtures() {
  std::vector<DesignFixture> out;
  DiscreteDesign moderate;
  moderate.points = {
      binary_point(0.3, 0.2, two_atoms(0.5, 1.5), two_atoms(2.0, 4.0)),
      binary_point(0.5, 0.5, two_atoms(1.0, 3.0), two_atoms(0.5, 2.5)),
      binary_point(0.2, 0.8, two_atoms(-2.5, 1.5), two_atoms(0.0, 4.0)),
  };
  out.push_back(finish("moderate", std::move(moderate)));

  DiscreteDesign extreme;
  extreme.points = {
      binary_point(0.25, 0.001, two_atoms(4.0, 6.0), two_atoms(5.0, 9.0)),
      binary_point(0.5, 0.3, two_atoms(-1.0, 1.0), two_atoms(1.0, 2.0)),
      binary_point(0.25, 0.999, two_atoms(2.0, 3.0), two_atoms(-1.0, 3.0)),
  };
  out.push_back(finish("extreme", std::move(extreme)));

  DiscreteDesign mixed;
  mixed.points = {
      binary_point(0.4, 0.35, three_atoms(0.0, 1.0, 2.0), three_atoms(1.0, 3.0, 4.0)),
      binary_point(0.6, 0.6, three_atoms(-1.0, 0.0, 3.0), three_atoms(2.0, 2.5, 5.0)),
  };
  out.push_back(finish("mixed", std::move(mixed)));
  return out;
}

std::vector<DesignFixture> multivalued_fixtures() {
  std::vector<DesignFixture> out;
  DiscreteDesign moderate;
  moderate.points = {
      {0.5, {0.2, 0.3, 0.5}, {two_atoms(0.0, 2.0), two_atoms(1.0, 3.0), two_atoms(2.0, 6.0)}},
      {0.5, {0.6, 0.1, 0.3}, {two_atoms(-1.0, 1.0), two_atoms(4.0, 5.0), two_atoms(0.0, 1.0)}},
  };
  out.push_back(finish("moderate3", std::move(moderate)));

  DiscreteDesign extreme;
  extreme.points = {
      {0.5, {0.001, 0.499, 0.5}, {two_atoms(3.0, 5.0), two_atoms(0.0, 1.0), two_atoms(2.0, 4.0)}},
      {0.5, {0.998, 0.001, 0.001}, {two_atoms(1.0, 2.0), two_atoms(5.0, 7.0), two_atoms(-3.0, -1.0)}},
  };
  out.push_back(finish("extreme3", std::move(extreme)));

  DiscreteDesign mixed;
  mixed.points = {
      {1.0,
       {0.25, 0.35, 0.4},
       {three_atoms(0.0, 1.0, 2.0), three_atoms(1.0, 2.0, 3.0), three_atoms(-1.0, 0.0, 4.0)}},
  };
  out.push_back(finish("mixed3", std::move(mixed)));
  return out;
}

std::vector<NamedKind> builtin_kinds() {
  std::vector<NamedKind> out;
  auto gnpw = [&](const std::string& name, double nu1, double nu2, std::array<double, 4> th) {
    GnpwSpec s;
    s.nu1 = nu1;
    s.nu2 = nu2;
    s.theta = th;
    out.push_back({name, ResidualKind::make_gnpw(s)});
  };
  gnpw("gnpw_npw", 0, 0, {0, 1, 0, -1});
  gnpw("gnpw_robinson_dr", 0, 0, {1, 0, -2, 1});
  gnpw("gnpw_half_weight", 0, 0, {0.5, 0.5, -1, 0});
  gnpw("gnpw_control_weight", 0, 0, {1, 0, -1, 0});
  gnpw("gnpw_weighted_nu", 1, 0.5, {0, 1, -1, 0});
  out.push_back({"one_sided_control", ResidualKind::simple(ResidualTag::OneSidedControl)});
  out.push_back({"one_sided_treated", ResidualKind::simple(ResidualTag::OneSidedTreated)});
  out.push_back({"weighted_aipw", ResidualKind::simple(ResidualTag::WeightedAipw)});
  out.push_back({"stabilized_aipw", ResidualKind::stabilized(0.5)});
  out.push_back({"hybrid_region", ResidualKind::simple(ResidualTag::HybridRegion)});
  out.push_back({"robinson", ResidualKind::simple(ResidualTag::RobinsonClassic)});
  out.push_back({"srp_no_propensity", ResidualKind::srp(1.0, 0.0)});
  out.push_back({"cac_difference", ResidualKind::cac({0, 1}, {-1.0, 1.0})});
  out.push_back({"cac_second_difference", ResidualKind::cac({0, 1, 2}, {1.0, -2.0, 1.0})});
  out.push_back({"cqr_median", ResidualKind::cqr(0.5, 1)});
  return out;
}

NuisanceSet misspecified_nuisances(const ResidualKind& kind, const DesignFixture& fx) {
  NuisanceSet out = truth_for(kind, fx.design, fx.region);
  for (std::size_t x = 0; x < out.size(); ++x) {
    auto& p = out[x];
    const double e = p.e;
    p.e = 0.05 + 0.9 * (1.0 - e) * (1.0 - e);
    p.mu0 += 1.3;
    p.mu1 -= 0.7;
    p.eta.reset();
    const std::size_t L = p.phi.size();
    for (std::size_t w = 0; w < L; ++w) {
      // a different interior probability vector
      p.phi[w] = (1.0 + static_cast<double>((w + x) % L)) / (static_cast<double>(L) + 2.0);
      p.gamma[w] = kind.tag == ResidualTag::MultivaluedCqr ? 0.3 : p.gamma[w] + 0.8 - 0.6 * w;
    }
  }
  return out;
}

std::vector<Direction> probe_directions(int levels) {
  std::vector<Direction> dirs;
  dirs.push_back({0.1, 0, 0, 0, {}, {}});
  dirs.push_back({0, 0.1, 0, 0, {}, {}});
  dirs.push_back({0, 0, 0.1, 0, {}, {}});
  dirs.push_back({0, 0, 0, 0.1, {}, {}});
  dirs.push_back({0.1, -0.1, 0.05, 0.1, {}, {}});
  dirs.push_back({-0.07, 0.03, -0.1, -0.05, {}, {}});
  for (auto& d : dirs) {
    d.h_phi.assign(static_cast<std::size_t>(levels), 0.0);
    d.h_gamma.assign(static_cast<std::size_t>(levels), 0.0);
  }
  Direction a, b;
  for (int w = 0; w < levels; ++w) {
    a.h_phi.push_back(w % 2 == 0 ? 0.05 : -0.03);
    a.h_gamma.push_back(0.1 - 0.05 * w);
    b.h_phi.push_back(-0.02 * (w + 1));
    b.h_gamma.push_back(w % 2 == 0 ? -0.1 : 0.08);
  }
  b.h_e = 0.05;
  dirs.push_back(a);
  dirs.push_back(b);
  return dirs;
}

bool within_design_region(const ResidualKind& kind, double e) {
  switch (kind.tag) {
    case ResidualTag::OneSidedControl: return e <= 0.9;
    case ResidualTag::OneSidedTreated: return e >= 0.1;
    case ResidualTag::StabilizedAipw: return e >= 0.01 && e <= 0.99;
    default:
      return true;
  }
}

bool CheckReport::all_as_expected() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const CheckRow& r) { return r.pass == r.expected_pass; });
}

std::string CheckReport::to_table() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %-14s %12s %10s %-6s %s\n", "kind", "property",
                "magnitude", "threshold", "result", "expected");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-24s %-14s %12.3e %10.1e %-6s %s%s%s\n", r.kind.c_str(),
                  r.property.c_str(), r.magnitude, r.threshold, r.pass ? "PASS" : "FAIL",
                  r.expected_pass ? "PASS" : "FAIL", r.note.empty() ? "" : "  ",
                  r.note.c_str());
    out += buf;
  }
  return out;
}

CheckReport run_check_suite() { return run_check_suite(builtin_kinds()); }

CheckReport run_check_suite(const std::vector<NamedKind>& kinds) {
  std::vector<DesignFixture> all = binary_fixtures();
  for (auto& fx : multivalued_fixtures()) all.push_back(std::move(fx));

  // documented failures: non-robust or non-orthogonal constructions
  const std::map<std::pair<ResidualTag, std::string>, bool> expected_fail = {
      {{ResidualTag::RobinsonClassic, "BDR"}, true},
      {{ResidualTag::RobinsonClassic, "GDR"}, true},
      {{ResidualTag::SrpNoPropensity, "orthogonality"}, true},
      {{ResidualTag::SrpNoPropensity, "BDR"}, true},
      {{ResidualTag::SrpNoPropensity, "GDR"}, true},
      {{ResidualTag::Gnpw, "GDR"}, true},
      {{ResidualTag::WeightedAipw, "GDR"}, true},
      {{ResidualTag::MultivaluedCac, "GDR"}, true},
  };
  auto expected = [&](ResidualTag tag, const std::string& prop) {
    return expected_fail.find({tag, prop}) == expected_fail.end();
  };

  CheckReport report;
  for (const auto& [name, kind] : kinds) {
    kind.validate();
    const auto fixtures = fixtures_for(kind, all);
    require(!fixtures.empty(), "no built-in design fits residual kind '" + name + "'");
    double moment = 0.0, orth = 0.0, bdr = 0.0, gdr = 0.0;
    // largest moment off the truth; zero means the residual is trivial (not probed for CQR)
    double ident = kind.tag == ResidualTag::MultivaluedCqr ? HUGE_VAL : 0.0;
    for (const DesignFixture* fx : fixtures) {
      const auto& design = fx->design;
      const NuisanceSet truth = truth_for(kind, design, fx->region);
      const NuisanceSet wrong = misspecified_nuisances(kind, *fx);
      std::vector<double> target(design.size());
      for (std::size_t x = 0; x < design.size(); ++x) target[x] = true_target(kind, design, x);

      for (std::size_t x = 0; x < design.size(); ++x)
        moment = std::max(moment, std::fabs(conditional_mean(kind, x, target[x], truth[x], design)));

      for (const auto& dir : probe_directions(design.levels()))
        for (std::size_t x = 0; x < design.size(); ++x) {
          if (!within_design_region(kind, point_propensity(kind, *fx, x))) continue;
          orth = std::max(orth, std::fabs(gateaux_derivative(kind, x, target[x], truth[x], dir,
                                                             design, kStep)));
        }

      for (const auto& r : dr_probe(kind, design, target, truth, wrong))
        bdr = std::max({bdr, std::fabs(r.moment_true_e_wrong_mu), std::fabs(r.moment_wrong_e_true_mu)});
      if (kind.tag != ResidualTag::MultivaluedCqr) {
        std::vector<double> shifted = target;
        for (auto& t : shifted) t += 1.0;
        for (const auto& r : dr_probe(kind, design, shifted, truth, wrong))
          ident = std::max({ident, std::fabs(r.moment_true_e_wrong_mu),
                            std::fabs(r.moment_wrong_e_true_mu)});
        for (double off : {-1.0, 0.5, 2.0}) {
          shifted = target;
          for (auto& t : shifted) t += off;
          for (const auto& r : dr_probe(kind, design, shifted, truth, wrong))
            gdr = std::max({gdr, std::fabs(r.moment_true_e_wrong_mu - r.moment_truth),
                            std::fabs(r.moment_wrong_e_true_mu - r.moment_truth)});
        }
      }
    }

    const ResidualTag tag = kind.tag;
    report.rows.push_back({name, "moment-zero", moment, kMomentTol, moment <= kMomentTol,
                           expected(tag, "moment-zero"), ""});
    CheckRow orow{name, "orthogonality", orth, kOrthTol, orth <= kOrthTol,
                  expected(tag, "orthogonality"), ""};
    if (!orow.expected_pass) {
      // a documented failure must be clearly visible, not marginal
      orow.pass = orth <= kNonOrthFloor;
      orow.note = "derivative must exceed 1e-3";
    }
    report.rows.push_back(orow);
    CheckRow brow{name, "BDR", bdr, kDrTol, bdr <= kDrTol && ident > 1e-9,
                  expected(tag, "BDR"), ""};
    if (bdr <= kDrTol && !(ident > 1e-9)) brow.note = "moment vanishes away from the truth";
    report.rows.push_back(brow);
    if (tag != ResidualTag::MultivaluedCqr)
      report.rows.push_back(
          {name, "GDR", gdr, kDrTol, gdr <= kDrTol, expected(tag, "GDR"), ""});
  }
  return report;
}

}  // namespace spw
