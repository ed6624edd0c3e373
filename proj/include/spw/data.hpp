#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spw {

enum class DatasetMode { LargeSample, FiniteSample };

/// Observations (Y, W, X). In finite-sample mode X is a stratum label,
/// remapped to dense ids 0..K-1 in ascending label order; in large-sample
/// mode X is a covariate row. Additional numeric columns (e.g. a known
/// propensity) are carried by name.
struct Dataset {
  DatasetMode mode = DatasetMode::FiniteSample;
  std::vector<double> y;
  std::vector<int> w;
  /// Number of treatment levels, |W| = L + 1.
  int levels = 2;
  std::string outcome_name = "y";
  std::string treatment_name = "w";

  // finite-sample mode
  std::vector<int> stratum;
  std::vector<std::int64_t> stratum_labels;
  std::string stratum_name = "x";

  // large-sample mode, row-major n x p
  std::vector<std::string> covariate_names;
  std::vector<double> covariates;

  std::vector<std::pair<std::string, std::vector<double>>> extra;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t num_covariates() const noexcept { return covariate_names.size(); }
  double covariate(std::size_t i, std::size_t j) const {
    return covariates[i * covariate_names.size() + j];
  }
  std::size_t num_strata() const noexcept { return stratum_labels.size(); }

  /// Named auxiliary or covariate column; nullptr when absent.
  const std::vector<double>* find_extra(const std::string& name) const;
  /// Like find_extra, also searching covariates; throws MissingColumn.
  std::vector<double> column(const std::string& name) const;

  /// Rows in the given order. Strata are re-densified over the kept rows.
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// Checks every Observation invariant; throws on the first violation.
void validate(const Dataset& data);

/// Build a finite-sample dataset from raw stratum labels.
Dataset make_finite_dataset(std::vector<double> y, std::vector<int> w,
                            const std::vector<std::int64_t>& labels,
                            int levels = 0);
/// Build a large-sample dataset from a row-major covariate matrix.
Dataset make_large_dataset(std::vector<double> y, std::vector<int> w,
                           std::vector<double> covariates,
                           std::vector<std::string> names, int levels = 0);

struct CsvSchema {
  std::string y = "y";
  std::string w = "w";
  /// Stratum column (finite mode) or covariate columns (large mode). An
  /// empty list in large mode takes every remaining numeric column.
  std::vector<std::string> x = {"x"};
  DatasetMode mode = DatasetMode::FiniteSample;
  /// Columns that must be present and finite (e.g. a propensity column).
  std::vector<std::string> required;
  /// Declared largest treatment label; inferred from the data when unset.
  std::optional<int> max_treatment;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);
Dataset parse_csv(const std::string& text, const CsvSchema& schema);
std::string to_csv(const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

/// Observation indices grouped by dense stratum id.
struct StrataIndex {
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> counts;
  std::vector<int> stratum_of;
  std::vector<std::int64_t> labels;

  std::size_t num_strata() const noexcept { return counts.size(); }
  std::size_t size() const noexcept { return stratum_of.size(); }
};

/// Throws StratumTooSmall (index = original label) when some N_k < 2 and
/// require_pairs is set.
StrataIndex build_strata(const Dataset& data, bool require_pairs = true);
/// Strata over raw dense ids, for callers that hold no Dataset.
StrataIndex build_strata(const std::vector<int>& stratum, std::size_t num_strata,
                         bool require_pairs = true);

/// Per-stratum count of units with W_i = w.
std::vector<std::size_t> occupancy(const std::vector<int>& w,
                                   const StrataIndex& strata, int level);
std::vector<std::size_t> occupancy(const Dataset& data, const StrataIndex& strata,
                                   int level);

}  // namespace spw
