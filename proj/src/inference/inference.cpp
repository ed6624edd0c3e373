#include "spw/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "spw/error.hpp"
#include "spw/parallel.hpp"

namespace spw {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(!t.empty() && used == t.size() && std::isfinite(v),
          "cannot read a number from '" + text + "' in " + what);
  return v;
}

[[noreturn]] void too_small(const StrataIndex& st, std::size_t k) {
  fail(ErrorCode::StratumTooSmall, "leave-one-out weights need strata of size >= 2",
       st.labels.empty() ? static_cast<std::int64_t>(k) : st.labels[k]);
}

}  // namespace

LinearStatistic parse_linear_statistic(const std::string& name) {
  if (name == "scaled_ate" || name == "tau_hat") return LinearStatistic::ScaledAte;
  if (name == "wmd") return LinearStatistic::Wmd;
  if (name == "ipw_fs" || name == "ipw") return LinearStatistic::IpwFs;
  fail(ErrorCode::StatisticNotLinear,
       "statistic '" + name + "' is not a supported linear statistic (scaled_ate, wmd, ipw_fs)");
}

std::string linear_statistic_name(LinearStatistic s) {
  switch (s) {
    case LinearStatistic::ScaledAte: return "scaled_ate";
    case LinearStatistic::Wmd: return "wmd";
    case LinearStatistic::IpwFs: return "ipw_fs";
  }
  return "unknown";
}

std::vector<double> statistic_weights(LinearStatistic stat, const StrataIndex& strata,
                                      const std::vector<int>& w) {
  const std::size_t n = strata.size();
  require(w.size() == n, "assignment length differs from strata");
  const std::size_t K = strata.num_strata();
  std::vector<std::size_t> treated(K, 0);
  for (std::size_t i = 0; i < n; ++i) {
    require(w[i] == 0 || w[i] == 1, "the weak-null test needs a binary treatment");
    treated[static_cast<std::size_t>(strata.stratum_of[i])] += static_cast<std::size_t>(w[i]);
  }
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(strata.stratum_of[i]);
    const std::size_t N = strata.counts[k];
    const std::size_t c1 = treated[k];
    const std::size_t c0 = N - c1;
    const bool t = w[i] == 1;
    switch (stat) {
      case LinearStatistic::ScaledAte: {
        if (N < 2) too_small(strata, k);
        const double d = static_cast<double>(N - 1);
        // peers in the opposite arm never include unit i
        q[i] = t ? static_cast<double>(c0) / d : -static_cast<double>(c1) / d;
        break;
      }
      case LinearStatistic::Wmd: {
        const double c = static_cast<double>(std::max<std::size_t>(1, t ? c1 : c0));
        q[i] = (t ? 1.0 : -1.0) * static_cast<double>(N) / c;
        break;
      }
      case LinearStatistic::IpwFs: {
        if (N < 2) too_small(strata, k);
        const double d = static_cast<double>(N - 1);
        const double p = static_cast<double>((t ? c1 : c0) - 1) / d;
        q[i] = (t ? 1.0 : -1.0) / std::max(p, 1.0 / (2.0 * d));
        break;
      }
    }
  }
  return q;
}

double apply_weights(const std::vector<double>& q, std::span<const double> y) {
  require(q.size() == y.size(), "weights and outcomes differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] * y[i];
  return acc / static_cast<double>(q.size());
}

std::vector<OmegaDraw> draw_omegas(const FsSample& s, const AssignmentModel& model,
                                   LinearStatistic stat, std::size_t B, std::uint64_t seed,
                                   std::size_t model_index, unsigned threads) {
  require(s.strata != nullptr, "sample has no strata index");
  require(s.levels == 2, "the weak-null test is implemented for binary treatments only");
  require(B >= 1, "need at least one Monte-Carlo draw");
  model.validate(2, s.strata->num_strata());
  const std::size_t n = s.n();
  const double dn = static_cast<double>(n);
  std::vector<OmegaDraw> out(B);
  parallel_for(B, threads, [&](std::size_t b) {
    RngHandle rng(seed, static_cast<std::uint64_t>(model_index * B + b));
    const std::vector<int> wt = draw_assignment(model, *s.strata, rng);
    const std::vector<double> q = statistic_weights(stat, *s.strata, wt);
    OmegaDraw d;
    d.o1 = apply_weights(q, s.y);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = q[i] * static_cast<double>(wt[i] - s.w[i]) / dn;
      d.o2 += u;
      if (u >= 0.0)
        d.o3 += u;
      else
        d.o4 += u;
    }
    out[b] = d;
  });
  return out;
}

NullGrid NullGrid::from_values(std::vector<double> values) {
  require(!values.empty(), "null grid is empty");
  for (double v : values) require(std::isfinite(v), "null grid values must be finite");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return NullGrid{std::move(values)};
}

NullGrid NullGrid::parse(const std::string& spec) {
  std::vector<std::string> parts;
  const char sep = spec.find(':') != std::string::npos ? ':' : ',';
  std::string cur;
  for (char c : spec) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (sep == ',') {
    std::vector<double> v;
    for (const auto& p : parts) v.push_back(to_double(p, "grid '" + spec + "'"));
    return from_values(std::move(v));
  }
  require(parts.size() == 3, "grid must look like lo:hi:step, got '" + spec + "'");
  const double lo = to_double(parts[0], "grid lower end");
  const double hi = to_double(parts[1], "grid upper end");
  const double step = to_double(parts[2], "grid step");
  require(lo <= hi, "grid needs lo <= hi");
  require(step > 0.0, "grid step must be positive");
  const double span = (hi - lo) / step;
  require(span <= 1e6, "grid has more than 10^6 points");
  const auto m = static_cast<std::size_t>(std::floor(span + 1e-9));
  std::vector<double> v(m + 1);
  for (std::size_t i = 0; i <= m; ++i) v[i] = lo + static_cast<double>(i) * step;
  return from_values(std::move(v));
}

TiePolicy randomized_tiebreak_policy(const std::string& name) {
  require(name == "ge", "unsupported tie rule '" + name + "'; only 'ge' is available");
  return TiePolicy{};
}

PValueBounds pvalue_bounds(const FsSample& s, LinearStatistic stat, const NullGrid& grid,
                           const std::vector<AssignmentModel>& models, double c1,
                           std::size_t B, std::uint64_t seed, unsigned threads) {
  require(s.strata != nullptr, "sample has no strata index");
  require(s.levels == 2, "the weak-null test is implemented for binary treatments only");
  require(!models.empty(), "model class is empty");
  require(!grid.values.empty(), "null grid is empty");
  require(std::isfinite(c1) && c1 >= 0.0, "c1 must be a finite nonnegative number");
  require(B >= 1, "need at least one Monte-Carlo draw");
  for (const auto& m : models) m.validate(2, s.strata->num_strata());

  PValueBounds out;
  out.grid = grid.values;
  out.draws = B;
  out.models = models.size();
  out.c1 = c1;
  out.statistic = stat;
  const std::vector<int> w(s.w.begin(), s.w.end());
  out.observed = apply_weights(statistic_weights(stat, *s.strata, w), s.y);

  const std::size_t G = grid.values.size();
  std::vector<std::size_t> lo_count(G, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> hi_count(G, 0);
  const double eps[2] = {-c1, c1};
  for (std::size_t l = 0; l < models.size(); ++l) {
    const auto draws = draw_omegas(s, models[l], stat, B, seed, l, threads);
    for (std::size_t g = 0; g < G; ++g) {
      const double tbar = grid.values[g];
      for (double e3 : eps)
        for (double e4 : eps) {
          std::size_t c = 0;
          for (const auto& d : draws)
            c += out.ties.exceeds(d.o1 + d.o2 * tbar + e3 * d.o3 + e4 * d.o4, out.observed) ? 1
                                                                                           : 0;
          lo_count[g] = std::min(lo_count[g], c);
          hi_count[g] = std::max(hi_count[g], c);
        }
    }
  }
  out.p_lo.resize(G);
  out.p_hi.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    out.p_lo[g] = static_cast<double>(lo_count[g]) / static_cast<double>(B);
    out.p_hi[g] = static_cast<double>(hi_count[g]) / static_cast<double>(B);
  }
  return out;
}

ConfidenceSet confidence_set(const PValueBounds& pvb, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  ConfidenceSet cs;
  cs.alpha = alpha;
  cs.resolution = 0.0;
  for (std::size_t g = 1; g < pvb.grid.size(); ++g) {
    const double gap = pvb.grid[g] - pvb.grid[g - 1];
    if (cs.resolution == 0.0 || gap < cs.resolution) cs.resolution = gap;
  }
  std::size_t last = 0;
  bool any = false;
  for (std::size_t g = 0; g < pvb.grid.size(); ++g) {
    if (!(pvb.p_hi[g] > alpha)) continue;
    if (any && g != last + 1) cs.contiguous = false;
    cs.values.push_back(pvb.grid[g]);
    last = g;
    any = true;
  }
  return cs;
}

LambdaBox parse_lambda_box(const std::string& spec) {
  const std::string s = trim(spec);
  require(s.rfind("k=", 0) == 0, "lambda box must look like k=LABEL:lo,hi, got '" + spec + "'");
  const auto colon = s.find(':');
  require(colon != std::string::npos, "lambda box is missing ':' in '" + spec + "'");
  const double label = to_double(s.substr(2, colon - 2), "lambda box label");
  require(label == std::floor(label), "stratum label must be an integer in '" + spec + "'");
  LambdaBox box;
  box.label = static_cast<std::int64_t>(label);
  const std::string range = s.substr(colon + 1);
  const auto comma = range.find(',');
  if (comma == std::string::npos) {
    box.lo = box.hi = to_double(range, "lambda box");
  } else {
    box.lo = to_double(range.substr(0, comma), "lambda box");
    box.hi = to_double(range.substr(comma + 1), "lambda box");
  }
  require(box.lo > 0.0 && box.hi < 1.0 && box.lo <= box.hi,
          "lambda box needs 0 < lo <= hi < 1 in '" + spec + "'");
  return box;
}

ModelGrid model_grid(const std::vector<LambdaBox>& boxes, const StrataIndex& strata,
                     const std::vector<int>& w, int resolution) {
  require(resolution >= 2, "lambda grid resolution must be at least 2");
  require(w.size() == strata.size(), "assignment length differs from strata");
  const std::size_t K = strata.num_strata();
  std::map<std::int64_t, std::size_t> by_label;
  for (std::size_t k = 0; k < K; ++k)
    by_label[strata.labels.empty() ? static_cast<std::int64_t>(k) : strata.labels[k]] = k;

  std::vector<std::vector<double>> axis(K);
  for (const auto& b : boxes) {
    auto it = by_label.find(b.label);
    require(it != by_label.end(), "lambda box names unknown stratum " + std::to_string(b.label));
    auto& ax = axis[it->second];
    require(ax.empty(), "stratum " + std::to_string(b.label) + " has two lambda boxes");
    require(b.lo > 0.0 && b.hi < 1.0 && b.lo <= b.hi, "lambda box needs 0 < lo <= hi < 1");
    if (b.lo == b.hi) {
      ax.push_back(b.lo);
    } else {
      for (int r = 0; r < resolution; ++r)
        ax.push_back(b.lo + (b.hi - b.lo) * static_cast<double>(r) / (resolution - 1));
    }
  }

  ModelGrid out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < K; ++k) {
    if (axis[k].empty()) {
      std::size_t treated = 0;
      for (std::size_t i : strata.members[k]) treated += w[i] == 1 ? 1 : 0;
      const double N = static_cast<double>(strata.counts[k]);
      const double edge = 1.0 / (2.0 * N);
      axis[k].push_back(std::clamp(static_cast<double>(treated) / N, edge, 1.0 - edge));
      out.plug_in_strata.push_back(strata.labels.empty() ? static_cast<std::int64_t>(k)
                                                         : strata.labels[k]);
    }
    if (total > kMaxModels / axis[k].size())
      fail(ErrorCode::ModelClassTooLarge, "lambda grid has more than " +
                                              std::to_string(kMaxModels) + " members");
    total *= axis[k].size();
  }

  out.models.reserve(total);
  for (std::size_t m = 0; m < total; ++m) {
    AssignmentModel am;
    am.lambda.resize(K);
    std::size_t rest = m;
    for (std::size_t k = K; k-- > 0;) {
      const double p = axis[k][rest % axis[k].size()];
      rest /= axis[k].size();
      am.lambda[k] = {1.0 - p, p};
    }
    out.models.push_back(std::move(am));
  }
  return out;
}

}  // namespace spw
