#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spw/finite_sample.hpp"

namespace spw {

/// Linear statistics (1/n) sum_i Q_i(W) Y_i usable for the weak-null test.
enum class LinearStatistic { ScaledAte, Wmd, IpwFs };

/// Throws StatisticNotLinear for anything outside LinearStatistic.
LinearStatistic parse_linear_statistic(const std::string& name);
std::string linear_statistic_name(LinearStatistic s);

/// Q_i(W) for the binary contrast of treatment 1 against 0. Depends only on
/// strata and the assignment.
std::vector<double> statistic_weights(LinearStatistic stat, const StrataIndex& strata,
                                      const std::vector<int>& w);
double apply_weights(const std::vector<double>& q, std::span<const double> y);

struct OmegaDraw {
  double o1 = 0.0;
  double o2 = 0.0;
  double o3 = 0.0;  // sum of nonnegative U_i
  double o4 = 0.0;  // sum of negative U_i
};

/// B draws of W~ from `model`; draw b uses RNG stream model_index * B + b.
std::vector<OmegaDraw> draw_omegas(const FsSample& s, const AssignmentModel& model,
                                   LinearStatistic stat, std::size_t B, std::uint64_t seed,
                                   std::size_t model_index = 0, unsigned threads = 1);

/// Sorted, deduplicated hypothesised values.
struct NullGrid {
  std::vector<double> values;

  /// "lo:hi:step" or a comma list.
  static NullGrid parse(const std::string& spec);
  static NullGrid from_values(std::vector<double> values);
};

/// Exceedance is counted with ">=" against the observed statistic; this is
/// the only supported rule and no randomisation is applied to ties.
struct TiePolicy {
  std::string name = "ge";
  bool exceeds(double draw, double observed) const noexcept { return draw >= observed; }
};
TiePolicy randomized_tiebreak_policy(const std::string& name = "ge");

struct PValueBounds {
  std::vector<double> grid;
  std::vector<double> p_lo;
  std::vector<double> p_hi;
  std::size_t draws = 0;
  std::size_t models = 0;
  double c1 = 0.0;
  double observed = 0.0;
  LinearStatistic statistic = LinearStatistic::ScaledAte;
  TiePolicy ties;
};

/// Bounds on the p-value function over the grid. One draw set per model is
/// reused for every grid point and every (eps3, eps4) in {-c1, c1}^2.
PValueBounds pvalue_bounds(const FsSample& s, LinearStatistic stat, const NullGrid& grid,
                           const std::vector<AssignmentModel>& models, double c1,
                           std::size_t B, std::uint64_t seed, unsigned threads = 1);

struct ConfidenceSet {
  std::vector<double> values;
  double alpha = 0.05;
  /// Smallest spacing of the grid that was inverted.
  double resolution = 0.0;
  /// True when the retained points are consecutive grid points.
  bool contiguous = true;
};

/// Grid points whose upper p-value bound exceeds alpha.
ConfidenceSet confidence_set(const PValueBounds& pvb, double alpha);

/// Per-stratum interval for P{W = 1}; lo == hi pins a single value.
struct LambdaBox {
  std::int64_t label = 0;
  double lo = 0.5;
  double hi = 0.5;
};

/// "k=LABEL:lo,hi" or "k=LABEL:value".
LambdaBox parse_lambda_box(const std::string& spec);

inline constexpr std::size_t kMaxModels = 10000;

struct ModelGrid {
  std::vector<AssignmentModel> models;
  /// Original labels of strata without a box; these use the observed share
  /// of treated units, clamped to [1/(2N_k), 1 - 1/(2N_k)].
  std::vector<std::int64_t> plug_in_strata;
};

/// Tensor grid over the boxes with `resolution` points per nondegenerate
/// box. Throws ModelClassTooLarge beyond kMaxModels members.
ModelGrid model_grid(const std::vector<LambdaBox>& boxes, const StrataIndex& strata,
                     const std::vector<int>& w, int resolution = 5);

}  // namespace spw
