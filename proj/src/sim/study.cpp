#include <algorithm>
#include <boost/math/statistics/univariate_statistics.hpp>
#include <cmath>
#include <limits>

#include "spw/error.hpp"
#include "spw/parallel.hpp"
#include "spw/sim.hpp"

namespace spw {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RepRow {
  std::vector<double> est;
  std::vector<int> covered;
  std::string failure;
  bool set_valued = false;
};

}  // namespace

EstimatorSpec EstimatorSpec::parse(const std::string& name, bool finite) {
  EstimatorSpec s;
  s.label = name;
  auto large_only = [&] {
    require(!finite, "estimator '" + name + "' needs a large-sample design");
  };
  auto finite_only = [&] {
    require(finite, "estimator '" + name + "' needs a stratified finite-sample design");
  };
  if (name == "npw") {
    large_only();
    s.kind = EstimatorKind::Gpw;
    s.nu = 1.0;
  } else if (name == "ipw") {
    if (finite) {
      s.kind = EstimatorKind::IpwFs;
    } else {
      s.kind = EstimatorKind::Gpw;
      s.nu = -1.0;
    }
  } else if (name.rfind("gpw:", 0) == 0) {
    large_only();
    s.kind = EstimatorKind::Gpw;
    const std::string v = name.substr(4);
    std::size_t used = 0;
    try {
      s.nu = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(!v.empty() && used == v.size() && std::isfinite(s.nu),
            "cannot read nu from '" + name + "'");
  } else if (name == "robinson" || name == "half-weight" || name == "one-sided-control" ||
             name == "overlap") {
    large_only();
    s.kind = EstimatorKind::Alt;
    s.alt = parse_alt_variant(name);
  } else if (name == "wmd") {
    finite_only();
    s.kind = EstimatorKind::Wmd;
  } else if (name == "ipw_fs") {
    finite_only();
    s.kind = EstimatorKind::IpwFs;
  } else if (name == "fpw") {
    finite_only();
    s.kind = EstimatorKind::Fpw;
  } else if (name == "scaled_ate") {
    finite_only();
    s.kind = EstimatorKind::ScaledAte;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown estimator '" + name + "'");
  }
  return s;
}

bool EstimatorSpec::needs_strata() const noexcept {
  return kind == EstimatorKind::Wmd || kind == EstimatorKind::IpwFs ||
         kind == EstimatorKind::Fpw || kind == EstimatorKind::ScaledAte;
}

double sample_quantile(std::vector<double> v, double p) {
  require(!v.empty(), "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, "quantile level must lie in [0,1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ColumnSummary summarize_column(const EstimatorResult& res, std::size_t col) {
  ColumnSummary s;
  s.column = res.columns.at(col);
  s.truth = res.truth.at(col);
  std::vector<double> v;
  std::size_t hits = 0, tried = 0;
  for (std::size_t r = 0; r < res.estimates.size(); ++r) {
    const double x = res.estimates[r][col];
    if (std::isfinite(x)) v.push_back(x);
    const int c = res.covered[r][col];
    if (c >= 0) {
      ++tried;
      hits += static_cast<std::size_t>(c);
    }
  }
  s.count = v.size();
  s.coverage = tried ? static_cast<double>(hits) / static_cast<double>(tried) : kNaN;
  if (v.empty()) {
    s.mean = s.sd = s.mc_se = s.bias = s.excess_kurtosis = kNaN;
    s.quantiles.assign(kSummaryProbs.size(), kNaN);
    return s;
  }
  namespace st = boost::math::statistics;
  s.mean = st::mean(v);
  s.sd = v.size() > 1 ? std::sqrt(st::sample_variance(v)) : kNaN;
  s.mc_se = s.sd / std::sqrt(static_cast<double>(v.size()));
  s.bias = s.mean - s.truth;
  s.excess_kurtosis = v.size() > 3 && s.sd > 0.0 ? st::excess_kurtosis(v) : kNaN;
  for (double p : kSummaryProbs) s.quantiles.push_back(sample_quantile(v, p));
  return s;
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.dgp.validate();
  require(cfg.reps >= 2, "a study needs at least two replications");
  require(!cfg.estimators.empty(), "a study needs at least one estimator");
  require(cfg.level > 0.0 && cfg.level < 1.0, "confidence level must lie in (0,1)");
  const bool finite = cfg.dgp.tag == DgpTag::FiniteSampleAppendix;
  const bool large = cfg.dgp.tag == DgpTag::LargeSampleAppendix;
  for (const auto& e : cfg.estimators) {
    if (finite) require(e.needs_strata(), "estimator '" + e.label + "' needs a large-sample design");
    if (large) require(!e.needs_strata(), "estimator '" + e.label + "' needs a finite design");
  }
  if (finite) cfg.fs.validate(2);
  const BasisSpec basis = BasisSpec::parse(cfg.basis);

  StudyResult out;
  out.config = cfg;
  const std::size_t E = cfg.estimators.size();
  for (const auto& e : cfg.estimators) {
    EstimatorResult r;
    r.label = e.label;
    if (e.needs_strata()) {
      const bool scaled = e.kind == EstimatorKind::ScaledAte;
      r.columns = {scaled ? "scaled_ate" : "ate"};
      double truth = kNaN;
      if (finite) {
        const double l = cfg.dgp.lambda;
        truth = scaled ? l * (1.0 - l) * 10.0 : cfg.fs.kappa[0] * 10.0 + cfg.fs.kappa[1] * 20.0;
      }
      r.truth = {truth};
    } else {
      r.columns = basis.names();
      r.truth.assign(r.columns.size(), kNaN);
      const bool linear = r.columns == std::vector<std::string>{"1", "x"};
      if (large && linear &&
          !(e.kind == EstimatorKind::Alt && e.alt == AltVariant::OverlapWeightWATE))
        r.truth = {3.0, -2.0};
    }
    if (cfg.dgp.tag == DgpTag::Custom && cfg.dgp.custom_truth.size() == r.columns.size())
      r.truth = cfg.dgp.custom_truth;
    out.estimators.push_back(std::move(r));
  }

  std::vector<std::vector<RepRow>> rows(cfg.reps, std::vector<RepRow>(E));
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t rep) {
    RngHandle rng(cfg.seed, rep);
    Dataset data;
    if (large)
      data = gen_large_sample(cfg.dgp, rng);
    else if (finite)
      data = gen_finite_sample(cfg.dgp, rng);
    else
      data = cfg.dgp.custom(cfg.dgp, rng);

    std::vector<double> e_col;
    StrataIndex strata;
    bool have_strata = false;
    for (std::size_t k = 0; k < E; ++k) {
      const auto& spec = cfg.estimators[k];
      auto& row = rows[rep][k];
      const std::size_t d = out.estimators[k].columns.size();
      row.est.assign(d, kNaN);
      row.covered.assign(d, -1);
      try {
        if (spec.needs_strata()) {
          if (!have_strata) {
            strata = build_strata(data, true);
            have_strata = true;
          }
          const FsSample s = make_sample(data, strata);
          switch (spec.kind) {
            case EstimatorKind::Wmd: row.est[0] = wmd_estimate(s, cfg.fs.kappa); break;
            case EstimatorKind::IpwFs: row.est[0] = ipw_fs_estimate(s, cfg.fs.kappa); break;
            case EstimatorKind::ScaledAte: row.est[0] = scaled_ate(s, 1, 0); break;
            case EstimatorKind::Fpw: {
              const SetEstimate th = fpw_set(s, cfg.fs).theta;
              row.set_valued = !th.is_point();
              row.est[0] = th.is_point() ? th.lo : 0.5 * (th.lo + th.hi);
              break;
            }
            default: break;
          }
        } else {
          if (e_col.empty()) e_col = data.column("e");
          const GpwFit fit = spec.kind == EstimatorKind::Gpw
                                 ? gpw_estimate(data, e_col, basis, spec.nu)
                                 : alt_estimate(data, e_col, basis, spec.alt);
          const auto& truth = out.estimators[k].truth;
          for (std::size_t j = 0; j < d; ++j) {
            row.est[j] = fit.beta[static_cast<Eigen::Index>(j)];
            if (!std::isfinite(truth[j])) continue;
            Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
            c[static_cast<Eigen::Index>(j)] = 1.0;
            const Interval ci = wald_ci(fit, c, cfg.level);
            row.covered[j] = ci.lo <= truth[j] && truth[j] <= ci.hi ? 1 : 0;
          }
        }
      } catch (const Error& err) {
        row.est.assign(d, kNaN);
        row.covered.assign(d, -1);
        row.failure = error_code_name(err.code());
      }
    }
  });

  for (std::size_t k = 0; k < E; ++k) {
    auto& r = out.estimators[k];
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      auto& row = rows[rep][k];
      r.estimates.push_back(std::move(row.est));
      r.covered.push_back(std::move(row.covered));
      if (!row.failure.empty()) ++r.failures[row.failure];
      if (row.set_valued) ++r.set_valued;
    }
    for (std::size_t j = 0; j < r.columns.size(); ++j) r.summary.push_back(summarize_column(r, j));
  }
  return out;
}

double silverman_bandwidth(const std::vector<double>& samples) {
  if (samples.size() < 30)
    fail(ErrorCode::TooFewSamples, "density summary needs at least 30 samples, got " +
                                       std::to_string(samples.size()));
  for (double x : samples) require(std::isfinite(x), "density samples must be finite");
  namespace st = boost::math::statistics;
  const double sd = std::sqrt(st::sample_variance(samples));
  const double iqr = sample_quantile(samples, 0.75) - sample_quantile(samples, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    fail(ErrorCode::DegenerateSamples, "samples have zero spread; bandwidth would be zero");
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> density_grid(const std::vector<double>& samples, std::size_t points) {
  require(points >= 2, "density grid needs at least two points");
  const double h = silverman_bandwidth(samples);
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn - 3.0 * h;
  const double hi = *mx + 3.0 * h;
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

DensitySummary density_summary(const std::vector<double>& samples,
                               const std::vector<double>& grid) {
  DensitySummary out;
  out.bandwidth = silverman_bandwidth(samples);
  out.grid = grid;
  const double h = out.bandwidth;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * M_PI));
  out.density.reserve(grid.size());
  for (double g : grid) {
    double acc = 0.0;
    for (double x : samples) {
      const double z = (g - x) / h;
      acc += std::exp(-0.5 * z * z);
    }
    out.density.push_back(acc * norm);
  }
  return out;
}

}  // namespace spw
