#include <cmath>
#include <string>

#include "spw/error.hpp"
#include "spw/finite_sample.hpp"

namespace spw {

namespace {

const StrataIndex& strata_of(const FsSample& s) {
  require(s.strata != nullptr, "sample has no strata index");
  require(s.strata->size() == s.n() && s.w.size() == s.n(),
          "sample columns and strata index differ in length");
  return *s.strata;
}

void check_level(const FsSample& s, int w) {
  require(w >= 0 && w < s.levels, "treatment " + std::to_string(w) + " out of range");
}

void check_stratum(const StrataIndex& st, std::size_t k) {
  require(k < st.num_strata(), "stratum " + std::to_string(k) + " out of range");
}

// c[k * L + w] = number of units in stratum k with W = w
std::vector<std::size_t> cell_counts(const FsSample& s) {
  const auto& st = strata_of(s);
  const auto L = static_cast<std::size_t>(s.levels);
  std::vector<std::size_t> c(st.num_strata() * L, 0);
  for (std::size_t i = 0; i < s.n(); ++i) {
    require(s.w[i] >= 0 && s.w[i] < s.levels, "treatment label out of range");
    ++c[static_cast<std::size_t>(st.stratum_of[i]) * L + static_cast<std::size_t>(s.w[i])];
  }
  return c;
}

[[noreturn]] void too_small(const StrataIndex& st, std::size_t k) {
  fail(ErrorCode::StratumTooSmall, "leave-one-out propensity needs strata of size >= 2",
       st.labels.empty() ? static_cast<std::int64_t>(k) : st.labels[k]);
}

}  // namespace

FsSample make_sample(const Dataset& data, const StrataIndex& strata) {
  require(data.size() == strata.size(), "strata index does not match dataset");
  FsSample s;
  s.y = data.y;
  s.w = data.w;
  s.strata = &strata;
  s.levels = data.levels;
  return s;
}

void FsConfig::validate(int levels) const {
  require(bounds.size() == static_cast<std::size_t>(levels),
          "need one outcome bound per treatment level");
  require(kappa.size() == static_cast<std::size_t>(levels),
          "kappa needs one entry per treatment level");
  bool nonzero = false;
  for (std::size_t w = 0; w < bounds.size(); ++w) {
    require(std::isfinite(bounds[w].lo) && std::isfinite(bounds[w].hi) &&
                bounds[w].lo <= bounds[w].hi,
            "bounds for w=" + std::to_string(w) + " must satisfy lo <= hi");
    require(std::isfinite(kappa[w]), "kappa must be finite");
    nonzero = nonzero || kappa[w] != 0.0;
  }
  require(nonzero, "kappa must have a nonzero entry");
}

AssignmentModel AssignmentModel::binary(const std::vector<double>& treated) {
  AssignmentModel m;
  for (double p : treated) m.lambda.push_back({1.0 - p, p});
  return m;
}

void AssignmentModel::validate(int levels, std::size_t strata) const {
  require(lambda.size() == strata, "assignment model has " + std::to_string(lambda.size()) +
                                       " strata, data has " + std::to_string(strata));
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    require(lambda[k].size() == static_cast<std::size_t>(levels),
            "assignment model has wrong number of treatment levels");
    double total = 0.0;
    for (double p : lambda[k]) {
      require(p > 0.0 && p < 1.0, "assignment probabilities must lie in (0,1)");
      total += p;
    }
    require(std::abs(total - 1.0) <= 1e-12,
            "assignment probabilities in stratum " + std::to_string(k) + " do not sum to 1");
  }
}

std::vector<int> draw_assignment(const AssignmentModel& model, const StrataIndex& strata,
                                 RngHandle& rng) {
  std::vector<int> w(strata.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& lam = model.lambda[static_cast<std::size_t>(strata.stratum_of[i])];
    const double u = rng.uniform01();
    double cum = 0.0;
    int pick = static_cast<int>(lam.size()) - 1;
    for (std::size_t v = 0; v + 1 < lam.size(); ++v) {
      cum += lam[v];
      if (u < cum) {
        pick = static_cast<int>(v);
        break;
      }
    }
    w[i] = pick;
  }
  return w;
}

std::size_t peers_with(const FsSample& s, std::size_t i, int w) {
  const auto& st = strata_of(s);
  require(i < s.n(), "unit index out of range");
  std::size_t c = 0;
  for (std::size_t j : st.members[static_cast<std::size_t>(st.stratum_of[i])])
    if (j != i && s.w[j] == w) ++c;
  return c;
}

double loo_shrinkage_weight(const FsSample& s, std::size_t i, int w) {
  check_level(s, w);
  const auto& st = strata_of(s);
  const double N = static_cast<double>(st.counts[static_cast<std::size_t>(st.stratum_of[i])]);
  return N / (1.0 + static_cast<double>(peers_with(s, i, w)));
}

double loo_propensity(const FsSample& s, std::size_t i, int w) {
  check_level(s, w);
  const auto& st = strata_of(s);
  const auto k = static_cast<std::size_t>(st.stratum_of[i]);
  if (st.counts[k] < 2) too_small(st, k);
  return static_cast<double>(peers_with(s, i, w)) / static_cast<double>(st.counts[k] - 1);
}

double shrinkage_mean(const FsSample& s, int w, std::size_t k) {
  check_level(s, w);
  const auto& st = strata_of(s);
  check_stratum(st, k);
  std::size_t c = 0;
  for (std::size_t i : st.members[k]) c += s.w[i] == w ? 1 : 0;
  // every w-unit sees c - 1 peers with W = w
  const double N = static_cast<double>(st.counts[k]);
  const double R = N / (1.0 + static_cast<double>(c) - 1.0);
  double acc = 0.0;
  for (std::size_t i : st.members[k])
    if (s.w[i] == w) acc += R * s.y[i];
  return acc / N;
}

double modified_subsample_mean(const FsSample& s, int w, std::size_t k) {
  check_level(s, w);
  const auto& st = strata_of(s);
  check_stratum(st, k);
  double acc = 0.0;
  std::size_t c = 0;
  for (std::size_t i : st.members[k])
    if (s.w[i] == w) {
      acc += s.y[i];
      ++c;
    }
  return acc / static_cast<double>(std::max<std::size_t>(1, c));
}

SetEstimate unpooled_set(const FsSample& s, int w, std::size_t k, const Bounds& bounds) {
  require(bounds.lo <= bounds.hi, "bounds must satisfy lo <= hi");
  const double m = shrinkage_mean(s, w, k);
  bool empty = true;
  for (std::size_t i : s.strata->members[k]) empty = empty && s.w[i] != w;
  if (!empty) return {m, m};
  return {m + bounds.lo, m + bounds.hi};
}

FpwResult fpw_set(const FsSample& s, const FsConfig& cfg, const PoolingWeights& omega) {
  const auto& st = strata_of(s);
  cfg.validate(s.levels);
  const std::size_t n = s.n();
  const std::size_t K = st.num_strata();
  require(n >= 2, "FPW needs at least two units");
  const auto counts = cell_counts(s);
  const auto L = static_cast<std::size_t>(s.levels);

  FpwResult out;
  out.per_w.resize(L);
  for (std::size_t w = 0; w < L; ++w) {
    const int wi = static_cast<int>(w);
    std::vector<double> mt(K);
    std::vector<double> empty(K);
    double direct = 0.0;  // sum_i R_{w,i} 1{W_i=w} Y_i
    for (std::size_t k = 0; k < K; ++k) {
      mt[k] = shrinkage_mean(s, wi, k);
      empty[k] = counts[k * L + w] == 0 ? 1.0 : 0.0;
      direct += static_cast<double>(st.counts[k]) * mt[k];
    }

    auto mean_at = [&](double t) {
      if (K == 1) return (direct + static_cast<double>(n) * t * empty[0]) / static_cast<double>(n);
      double imputed = 0.0;
      // t enters only through empty strata; the empty count is integer-valued
      // so a single empty stratum leaves an exact zero coefficient on t
      double pooled_mean = 0.0;
      double pooled_empty = 0.0;
      if (!omega)
        for (std::size_t k = 0; k < K; ++k) {
          pooled_mean += static_cast<double>(st.counts[k]) * mt[k];
          pooled_empty += static_cast<double>(st.counts[k]) * empty[k];
        }
      for (std::size_t kp = 0; kp < K; ++kp) {
        if (empty[kp] == 0.0) continue;
        const double Nkp = static_cast<double>(st.counts[kp]);
        if (!omega) {
          const double others = (pooled_mean - Nkp * mt[kp]) + t * (pooled_empty - Nkp);
          imputed += Nkp * others / (static_cast<double>(n) - Nkp);
          continue;
        }
        for (std::size_t i : st.members[kp]) {
          double acc = 0.0;
          double wsum = 0.0;
          for (std::size_t k = 0; k < K; ++k) {
            if (k == kp) continue;
            const double om = omega(wi, k, i);
            require(std::isfinite(om) && om >= 0.0, "pooling weights must be nonnegative");
            wsum += om;
            acc += om * (mt[k] + t * empty[k]);
          }
          require(std::abs(wsum - 1.0) <= 1e-12, "pooling weights for unit " +
                                                    std::to_string(i + 1) + " do not sum to 1");
          imputed += acc;
        }
      }
      return (direct + imputed) / static_cast<double>(n);
    };
    out.per_w[w] = {mean_at(cfg.bounds[w].lo), mean_at(cfg.bounds[w].hi)};
  }

  for (std::size_t w = 0; w < L; ++w) {
    const double kw = cfg.kappa[w];
    if (kw == 0.0) continue;
    const auto& u = out.per_w[w];
    out.theta.lo += kw * (kw > 0.0 ? u.lo : u.hi);
    out.theta.hi += kw * (kw > 0.0 ? u.hi : u.lo);
  }
  return out;
}

double wmd_estimate(const FsSample& s, const std::vector<double>& kappa) {
  const auto& st = strata_of(s);
  require(kappa.size() == static_cast<std::size_t>(s.levels), "kappa length differs from levels");
  double acc = 0.0;
  for (std::size_t w = 0; w < kappa.size(); ++w) {
    if (kappa[w] == 0.0) continue;
    double part = 0.0;
    for (std::size_t k = 0; k < st.num_strata(); ++k)
      part += static_cast<double>(st.counts[k]) *
              modified_subsample_mean(s, static_cast<int>(w), k);
    acc += kappa[w] * part;
  }
  return acc / static_cast<double>(s.n());
}

double ipw_fs_estimate(const FsSample& s, const std::vector<double>& kappa) {
  const auto& st = strata_of(s);
  require(kappa.size() == static_cast<std::size_t>(s.levels), "kappa length differs from levels");
  const auto counts = cell_counts(s);
  const auto L = static_cast<std::size_t>(s.levels);
  double acc = 0.0;
  for (std::size_t w = 0; w < kappa.size(); ++w) {
    if (kappa[w] == 0.0) continue;
    double part = 0.0;  // sum_k N_k mu_breve_{w,k} = sum_i 1{W_i=w} Y_i / max(P, clamp)
    for (std::size_t k = 0; k < st.num_strata(); ++k) {
      const double Nk = static_cast<double>(st.counts[k]);
      if (counts[k * L + w] == 0) continue;
      if (st.counts[k] < 2) too_small(st, k);
      const double floor = 1.0 / (2.0 * Nk - 2.0);
      const double p = static_cast<double>(counts[k * L + w] - 1) / (Nk - 1.0);
      for (std::size_t i : st.members[k])
        if (s.w[i] == static_cast<int>(w)) part += s.y[i] / std::max(p, floor);
    }
    acc += kappa[w] * part;
  }
  return acc / static_cast<double>(s.n());
}

double scaled_ate(const FsSample& s, int a, int b) {
  check_level(s, a);
  check_level(s, b);
  require(a != b, "scaled ATE needs two distinct treatments");
  const auto& st = strata_of(s);
  const auto counts = cell_counts(s);
  const auto L = static_cast<std::size_t>(s.levels);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    if (s.w[i] != a && s.w[i] != b) continue;
    const auto k = static_cast<std::size_t>(st.stratum_of[i]);
    if (st.counts[k] < 2) too_small(st, k);
    const double denom = static_cast<double>(st.counts[k] - 1);
    // the other treatment never includes unit i itself
    if (s.w[i] == a)
      acc += static_cast<double>(counts[k * L + static_cast<std::size_t>(b)]) / denom * s.y[i];
    else
      acc -= static_cast<double>(counts[k * L + static_cast<std::size_t>(a)]) / denom * s.y[i];
  }
  return acc / static_cast<double>(s.n());
}

double scaled_ate_factor(const AssignmentModel& model, const StrataIndex& strata, int a, int b) {
  model.validate(model.levels(), strata.num_strata());
  require(a >= 0 && b >= 0 && a < model.levels() && b < model.levels(), "treatment out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const auto& lam = model.lambda[static_cast<std::size_t>(strata.stratum_of[i])];
    acc += lam[static_cast<std::size_t>(a)] * lam[static_cast<std::size_t>(b)];
  }
  return acc / static_cast<double>(strata.size());
}

}  // namespace spw
