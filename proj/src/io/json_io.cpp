#include "spw/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "spw/error.hpp"

namespace spw {

std::string format17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_rec(const json& j, int indent, int depth, std::string& out) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::number_float:
      out += format17(j.get<double>());
      return;
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_rec(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // numeric arrays stay on one line
      bool flat = true;
      for (const auto& v : j) flat = flat && (v.is_number() || v.is_null());
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_rec(v, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json num_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

double get_number(const json& j, const char* key) {
  require(j.at(key).is_number(), std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> get_numbers(const json& j, const char* key) {
  const json& a = j.at(key);
  require(a.is_array(), std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : a) {
    require(v.is_number(), std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ResidualTag tag_from_name(const std::string& name) {
  for (ResidualTag t :
       {ResidualTag::Gnpw, ResidualTag::OneSidedControl, ResidualTag::OneSidedTreated,
        ResidualTag::WeightedAipw, ResidualTag::StabilizedAipw, ResidualTag::HybridRegion,
        ResidualTag::RobinsonClassic, ResidualTag::SrpNoPropensity, ResidualTag::MultivaluedCac,
        ResidualTag::MultivaluedCqr})
    if (residual_tag_name(t) == name) return t;
  fail(ErrorCode::InvalidArgument, "unknown residual kind '" + name + "'");
}

}  // namespace

std::string dump17(const json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  return out;
}

ResidualKind residual_kind_from_json(const json& j) {
  require(j.is_object(), "residual kind must be a JSON object");
  require(j.contains("kind") && j.at("kind").is_string(), "residual kind needs a string 'kind'");
  const ResidualTag tag = tag_from_name(j.at("kind").get<std::string>());
  std::set<std::string> allowed{"kind"};
  ResidualKind k;
  switch (tag) {
    case ResidualTag::Gnpw: {
      allowed.insert({"nu1", "nu2", "theta"});
      GnpwSpec g;
      if (j.contains("nu1")) g.nu1 = get_number(j, "nu1");
      if (j.contains("nu2")) g.nu2 = get_number(j, "nu2");
      if (j.contains("theta")) {
        auto t = get_numbers(j, "theta");
        require(t.size() == 4, "'theta' needs four entries");
        for (std::size_t i = 0; i < 4; ++i) g.theta[i] = t[i];
      }
      k = ResidualKind::make_gnpw(g);
      break;
    }
    case ResidualTag::StabilizedAipw: {
      allowed.insert({"r", "m"});
      std::optional<double> m;
      if (j.contains("m")) m = get_number(j, "m");
      k = ResidualKind::stabilized(j.contains("r") ? get_number(j, "r") : 0.5, m);
      break;
    }
    case ResidualTag::SrpNoPropensity: {
      allowed.insert("theta");
      std::vector<double> t{1.0, 0.0};
      if (j.contains("theta")) t = get_numbers(j, "theta");
      require(t.size() == 2, "srp 'theta' needs two entries");
      k = ResidualKind::srp(t[0], t[1]);
      break;
    }
    case ResidualTag::MultivaluedCac: {
      allowed.insert({"levels", "kappa", "m"});
      std::vector<int> levels;
      for (double v : get_numbers(j, "levels")) {
        require(v == std::floor(v) && v >= 0.0, "'levels' must hold treatment labels");
        levels.push_back(static_cast<int>(v));
      }
      std::optional<double> m;
      if (j.contains("m")) m = get_number(j, "m");
      k = ResidualKind::cac(std::move(levels), get_numbers(j, "kappa"), m);
      break;
    }
    case ResidualTag::MultivaluedCqr: {
      allowed.insert({"quantile", "level"});
      const double lvl = j.contains("level") ? get_number(j, "level") : 1.0;
      require(lvl == std::floor(lvl) && lvl >= 0.0, "'level' must be a treatment label");
      k = ResidualKind::cqr(j.contains("quantile") ? get_number(j, "quantile") : 0.5,
                            static_cast<int>(lvl));
      break;
    }
    default:
      k = ResidualKind::simple(tag);
      break;
  }
  for (auto it = j.begin(); it != j.end(); ++it)
    require(allowed.count(it.key()) > 0, "field '" + it.key() + "' is not used by kind '" +
                                             residual_tag_name(tag) + "'");
  k.validate();
  return k;
}

json residual_kind_to_json(const ResidualKind& k) {
  json j;
  j["kind"] = residual_tag_name(k.tag);
  switch (k.tag) {
    case ResidualTag::Gnpw:
      j["nu1"] = k.gnpw.nu1;
      j["nu2"] = k.gnpw.nu2;
      j["theta"] = num_array({k.gnpw.theta.begin(), k.gnpw.theta.end()});
      break;
    case ResidualTag::StabilizedAipw:
      j["r"] = k.r_default;
      if (k.bound_m) j["m"] = *k.bound_m;
      break;
    case ResidualTag::SrpNoPropensity:
      j["theta"] = num_array({k.srp_theta[0], k.srp_theta[1]});
      break;
    case ResidualTag::MultivaluedCac:
      j["levels"] = k.cac_levels;
      j["kappa"] = num_array(k.kappa);
      if (k.bound_m) j["m"] = *k.bound_m;
      break;
    case ResidualTag::MultivaluedCqr:
      j["quantile"] = k.quantile;
      j["level"] = k.cqr_level;
      break;
    default:
      break;
  }
  return j;
}

json fit_to_json(const GpwFit& fit, double level) {
  json j;
  j["method"] = fit.method;
  j["terms"] = fit.terms;
  std::vector<double> beta(fit.beta.data(), fit.beta.data() + fit.beta.size());
  j["beta"] = num_array(beta);
  json sigma = json::array();
  std::vector<double> se;
  for (Eigen::Index r = 0; r < fit.sigma.rows(); ++r) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < fit.sigma.cols(); ++c) row.push_back(fit.sigma(r, c));
    sigma.push_back(num_array(row));
    se.push_back(std::sqrt(std::max(0.0, fit.sigma(r, r)) / static_cast<double>(fit.n)));
  }
  j["sigma"] = sigma;
  j["se"] = num_array(se);
  j["condition"] = num(fit.condition);
  j["n"] = fit.n;
  j["nu"] = num(fit.nu);
  if (level > 0.0 && level < 1.0) {
    j["level"] = level;
    json ci = json::array();
    for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(fit.beta.size());
      c[k] = 1.0;
      const Interval iv = wald_ci(fit, c, level);
      ci.push_back(num_array({iv.lo, iv.hi}));
    }
    j["ci"] = ci;
  }
  return j;
}

json fpw_to_json(const FpwResult& r) {
  json j;
  j["lo"] = num(r.theta.lo);
  j["hi"] = num(r.theta.hi);
  if (r.theta.is_point()) j["point"] = num(r.theta.lo);
  json per = json::array();
  for (const auto& u : r.per_w) per.push_back(num_array({u.lo, u.hi}));
  j["per_w_intervals"] = per;
  return j;
}

json pvalue_meta_to_json(const PValueBounds& pvb) {
  json j;
  j["statistic"] = linear_statistic_name(pvb.statistic);
  j["observed"] = num(pvb.observed);
  j["draws"] = pvb.draws;
  j["models"] = pvb.models;
  j["c1"] = num(pvb.c1);
  j["tie_rule"] = pvb.ties.name;
  j["grid_points"] = pvb.grid.size();
  if (!pvb.grid.empty()) {
    j["grid_min"] = num(pvb.grid.front());
    j["grid_max"] = num(pvb.grid.back());
  }
  return j;
}

std::string pvalue_csv(const PValueBounds& pvb) {
  std::string out = "Tbar,p_lo,p_hi\n";
  for (std::size_t g = 0; g < pvb.grid.size(); ++g)
    out += format17(pvb.grid[g]) + "," + format17(pvb.p_lo[g]) + "," + format17(pvb.p_hi[g]) +
           "\n";
  return out;
}

json confidence_set_to_json(const ConfidenceSet& cs) {
  json j;
  j["alpha"] = num(cs.alpha);
  j["values"] = num_array(cs.values);
  j["resolution"] = num(cs.resolution);
  j["contiguous"] = cs.contiguous;
  if (!cs.values.empty()) {
    j["min"] = num(cs.values.front());
    j["max"] = num(cs.values.back());
  }
  return j;
}

json study_to_json(const StudyResult& study) {
  const auto& c = study.config;
  json j;
  json cfg;
  cfg["dgp"] = dgp_tag_name(c.dgp.tag);
  cfg["n"] = c.dgp.n;
  if (c.dgp.tag == DgpTag::FiniteSampleAppendix) {
    cfg["lambda"] = num(c.dgp.lambda);
    cfg["homogeneous_effect"] = c.dgp.homogeneous_effect;
  }
  cfg["reps"] = c.reps;
  cfg["seed"] = c.seed;
  cfg["basis"] = c.basis;
  cfg["level"] = num(c.level);
  j["config"] = cfg;
  json ests = json::array();
  for (const auto& e : study.estimators) {
    json je;
    je["label"] = e.label;
    je["columns"] = e.columns;
    json fails = json::object();
    for (const auto& [k, v] : e.failures) fails[k] = v;
    je["failures"] = fails;
    je["set_valued"] = e.set_valued;
    json cols = json::array();
    for (const auto& s : e.summary) {
      json js;
      js["column"] = s.column;
      js["truth"] = num(s.truth);
      js["count"] = s.count;
      js["mean"] = num(s.mean);
      js["sd"] = num(s.sd);
      js["mc_se"] = num(s.mc_se);
      js["bias"] = num(s.bias);
      js["excess_kurtosis"] = num(s.excess_kurtosis);
      js["quantile_levels"] = num_array(kSummaryProbs);
      js["quantiles"] = num_array(s.quantiles);
      js["coverage"] = num(s.coverage);
      cols.push_back(js);
    }
    je["summary"] = cols;
    ests.push_back(je);
  }
  j["estimators"] = ests;
  return j;
}

std::string estimates_csv(const EstimatorResult& res) {
  std::string out = "rep";
  for (const auto& c : res.columns) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < res.estimates.size(); ++r) {
    out += std::to_string(r);
    for (double v : res.estimates[r]) out += "," + (std::isfinite(v) ? format17(v) : "NA");
    out += "\n";
  }
  return out;
}

std::string density_csv(const DensitySummary& d) {
  std::string out = "x,density\n";
  for (std::size_t i = 0; i < d.grid.size(); ++i)
    out += format17(d.grid[i]) + "," + format17(d.density[i]) + "\n";
  return out;
}

json check_report_to_json(const CheckReport& report) {
  json j;
  j["all_as_expected"] = report.all_as_expected();
  json rows = json::array();
  for (const auto& r : report.rows) {
    json jr;
    jr["kind"] = r.kind;
    jr["property"] = r.property;
    jr["magnitude"] = num(r.magnitude);
    jr["threshold"] = num(r.threshold);
    jr["pass"] = r.pass;
    jr["expected_pass"] = r.expected_pass;
    jr["note"] = r.note;
    rows.push_back(jr);
  }
  j["rows"] = rows;
  return j;
}

}  // namespace spw
