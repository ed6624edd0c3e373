#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spw/data.hpp"
#include "spw/rng.hpp"

namespace spw {

/// Borrowed view of a stratified sample: outcomes, treatments and strata.
struct FsSample {
  std::span<const double> y;
  std::span<const int> w;
  const StrataIndex* strata = nullptr;
  int levels = 2;

  std::size_t n() const noexcept { return y.size(); }
};

FsSample make_sample(const Dataset& data, const StrataIndex& strata);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Known outcome range per treatment and the contrast weights kappa.
struct FsConfig {
  std::vector<Bounds> bounds;
  std::vector<double> kappa;

  void validate(int levels) const;
};

struct SetEstimate {
  double lo = 0.0;
  double hi = 0.0;
  bool is_point() const noexcept { return lo == hi; }
};

/// Per-stratum treatment probabilities lambda[k][w].
struct AssignmentModel {
  std::vector<std::vector<double>> lambda;

  /// Binary model from per-stratum P{W = 1}.
  static AssignmentModel binary(const std::vector<double>& treated);
  void validate(int levels, std::size_t strata) const;
  int levels() const noexcept {
    return lambda.empty() ? 0 : static_cast<int>(lambda.front().size());
  }
};

/// Draw W_i independently from lambda[stratum(i)].
std::vector<int> draw_assignment(const AssignmentModel& model, const StrataIndex& strata,
                                 RngHandle& rng);

/// Count of units j != i in the stratum of i with W_j = w.
std::size_t peers_with(const FsSample& s, std::size_t i, int w);
double loo_shrinkage_weight(const FsSample& s, std::size_t i, int w);
/// Leave-one-out propensity (peers with w) / (N - 1).
double loo_propensity(const FsSample& s, std::size_t i, int w);

double shrinkage_mean(const FsSample& s, int w, std::size_t k);
double modified_subsample_mean(const FsSample& s, int w, std::size_t k);

SetEstimate unpooled_set(const FsSample& s, int w, std::size_t k, const Bounds& bounds);

/// Pooling weight omega(w, k, i) for imputing unit i from stratum k.
using PoolingWeights = std::function<double(int w, std::size_t k, std::size_t i)>;

struct FpwResult {
  SetEstimate theta;
  std::vector<SetEstimate> per_w;
};

/// Finite-sample stable probability weighting set-estimator. Without
/// pooling weights, omega = N_k / (n - N_{X_i}).
FpwResult fpw_set(const FsSample& s, const FsConfig& cfg,
                  const PoolingWeights& omega = nullptr);

double wmd_estimate(const FsSample& s, const std::vector<double>& kappa);
double ipw_fs_estimate(const FsSample& s, const std::vector<double>& kappa);
double scaled_ate(const FsSample& s, int a, int b);

/// G_{a,b} = mean over units of lambda_a lambda_b.
double scaled_ate_factor(const AssignmentModel& model, const StrataIndex& strata, int a, int b);

/// Potential outcomes y[i][w].
struct PotentialOutcomes {
  std::vector<std::vector<double>> y;

  std::vector<double> realize(const std::vector<int>& w) const;
};

using Statistic = std::function<double(const FsSample&)>;
using SetStatistic = std::function<SetEstimate(const FsSample&)>;

struct Expectation {
  double value = 0.0;
  double total_probability = 0.0;
  std::size_t assignments = 0;
};

struct SetExpectation {
  double lo = 0.0;
  double hi = 0.0;
  double total_probability = 0.0;
  std::size_t assignments = 0;
};

/// Largest number of assignment vectors the exact oracle will visit.
inline constexpr std::size_t kMaxEnumeration = std::size_t{1} << 24;

/// Exact expectation over every assignment vector, weighting each by
/// prod_i lambda[X_i][W_i]. Blocks of a fixed size are summed in order and
/// combined pairwise, so the result does not depend on `threads`.
Expectation enumerate_expectation(const Statistic& stat, const PotentialOutcomes& po,
                                  const AssignmentModel& model, const StrataIndex& strata,
                                  unsigned threads = 1);
SetExpectation enumerate_set_expectation(const SetStatistic& stat, const PotentialOutcomes& po,
                                         const AssignmentModel& model,
                                         const StrataIndex& strata, unsigned threads = 1);

}  // namespace spw
