#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spw/data.hpp"
#include "spw/finite_sample.hpp"
#include "spw/gpw.hpp"
#include "spw/rng.hpp"

namespace spw {

enum class DgpTag { LargeSampleAppendix, FiniteSampleAppendix, Custom };

std::string dgp_tag_name(DgpTag tag);
DgpTag parse_dgp_tag(const std::string& name);

struct DgpSpec;
using CustomGenerator = std::function<Dataset(const DgpSpec&, RngHandle&)>;

struct DgpSpec {
  DgpTag tag = DgpTag::LargeSampleAppendix;
  std::size_t n = 2000;
  /// Finite design: P{W=1} in the 0.8n stratum; the other stratum uses 1 - lambda.
  double lambda = 0.5;
  /// Finite design: drop the unit-level effect noise so every unit has effect 10.
  bool homogeneous_effect = false;
  CustomGenerator custom;
  /// Custom design: true values per estimator output column, empty if unknown.
  std::vector<double> custom_truth;

  void validate() const;
};

/// Large design: X~U(0,1), W~Bernoulli(X^4), outcome with tau(X) = 3 - 2X.
/// Covariate "x", extra column "e" = X^4.
Dataset gen_large_sample(const DgpSpec& spec, RngHandle& rng);

struct FiniteDraw {
  Dataset data;
  PotentialOutcomes po;
};

/// Finite design with strata X_i = 1{i > 0.8n}; potential outcomes are kept.
FiniteDraw gen_finite_sample_full(const DgpSpec& spec, RngHandle& rng);
Dataset gen_finite_sample(const DgpSpec& spec, RngHandle& rng);
/// Assignment model of the finite design.
AssignmentModel finite_design_model(double lambda);
/// Outcome bounds of the finite design: w=0 in [6,14], w=1 in [13,27].
FsConfig finite_design_config();

enum class EstimatorKind { Gpw, Alt, Wmd, IpwFs, Fpw, ScaledAte };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Gpw;
  double nu = 1.0;
  AltVariant alt = AltVariant::RobinsonRegression;
  std::string label;

  /// npw, ipw, gpw:<nu>, robinson, half-weight, one-sided-control, overlap,
  /// wmd, ipw_fs, fpw, scaled_ate. "ipw" means gpw(-1) on large designs and
  /// ipw_fs on finite ones.
  static EstimatorSpec parse(const std::string& name, bool finite);
  bool needs_strata() const noexcept;
};

struct StudyConfig {
  DgpSpec dgp;
  std::vector<EstimatorSpec> estimators;
  std::size_t reps = 500;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string basis = "1,x";
  double level = 0.95;
  FsConfig fs = finite_design_config();
};

struct ColumnSummary {
  std::string column;
  double truth = 0.0;  // NaN when unknown
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
  double mc_se = 0.0;
  double bias = 0.0;
  double excess_kurtosis = 0.0;
  std::vector<double> quantiles;  // at kSummaryProbs
  double coverage = 0.0;          // NaN when no interval is available
};

inline const std::vector<double> kSummaryProbs{0.025, 0.25, 0.5, 0.75, 0.975};

struct EstimatorResult {
  std::string label;
  std::vector<std::string> columns;
  std::vector<double> truth;
  /// reps x columns; NaN rows for failed replications.
  std::vector<std::vector<double>> estimates;
  /// reps x columns; 1 covered, 0 missed, -1 not available.
  std::vector<std::vector<int>> covered;
  std::map<std::string, std::size_t> failures;
  /// Replications where FPW was set-valued (midpoint recorded).
  std::size_t set_valued = 0;
  std::vector<ColumnSummary> summary;
};

struct StudyResult {
  StudyConfig config;
  std::vector<EstimatorResult> estimators;
};

/// Replication r draws its data from RNG stream r; the result does not
/// depend on the thread count.
StudyResult run_study(const StudyConfig& cfg);

/// Recompute the summary of one column from the raw matrix.
ColumnSummary summarize_column(const EstimatorResult& res, std::size_t col);

/// Type-7 sample quantile.
double sample_quantile(std::vector<double> v, double p);

struct DensitySummary {
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

/// Gaussian kernel density with Silverman's rule-of-thumb bandwidth.
DensitySummary density_summary(const std::vector<double>& samples,
                               const std::vector<double>& grid);
/// Evenly spaced grid covering the samples plus three bandwidths each side.
std::vector<double> density_grid(const std::vector<double>& samples, std::size_t points = 256);
double silverman_bandwidth(const std::vector<double>& samples);

}  // namespace spw
