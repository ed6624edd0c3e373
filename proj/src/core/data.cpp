#include "spw/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spw/error.hpp"

namespace spw {

const std::vector<double>* Dataset::find_extra(const std::string& name) const {
  for (const auto& [key, values] : extra)
    if (key == name) return &values;
  return nullptr;
}

std::vector<double> Dataset::column(const std::string& name) const {
  if (const auto* v = find_extra(name)) return *v;
  for (std::size_t j = 0; j < covariate_names.size(); ++j) {
    if (covariate_names[j] != name) continue;
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = covariate(i, j);
    return out;
  }
  if (name == "y") return y;
  fail(ErrorCode::MissingColumn, "missing column '" + name + "'");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.mode = mode;
  out.levels = levels;
  out.stratum_name = stratum_name;
  out.outcome_name = outcome_name;
  out.treatment_name = treatment_name;
  out.covariate_names = covariate_names;
  const std::size_t p = covariate_names.size();
  std::vector<std::int64_t> labels;
  for (std::size_t r : rows) {
    require(r < size(), "subset row out of range");
    out.y.push_back(y[r]);
    out.w.push_back(w[r]);
    if (mode == DatasetMode::FiniteSample)
      labels.push_back(stratum_labels[static_cast<std::size_t>(stratum[r])]);
    for (std::size_t j = 0; j < p; ++j) out.covariates.push_back(covariate(r, j));
  }
  for (const auto& [key, values] : extra) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (std::size_t r : rows) v.push_back(values[r]);
    out.extra.emplace_back(key, std::move(v));
  }
  if (mode == DatasetMode::FiniteSample) {
    std::vector<std::int64_t> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    out.stratum_labels = sorted;
    for (auto l : labels)
      out.stratum.push_back(static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), l) - sorted.begin()));
  }
  return out;
}

void validate(const Dataset& data) {
  const std::size_t n = data.size();
  if (n == 0) fail(ErrorCode::EmptyDataset, "dataset has no observations");
  require(data.w.size() == n, "treatment column length differs from outcome");
  require(data.levels >= 2, "at least two treatment levels are required");
  for (std::size_t i = 0; i < n; ++i) {
    auto row = static_cast<std::int64_t>(i + 1);
    if (!std::isfinite(data.y[i]))
      fail(ErrorCode::NonFiniteValue, "non-finite outcome in row " + std::to_string(row), row);
    if (data.w[i] < 0 || data.w[i] >= data.levels)
      fail(ErrorCode::UnknownTreatmentLabel,
           "treatment label " + std::to_string(data.w[i]) + " in row " +
               std::to_string(row) + " is outside 0.." + std::to_string(data.levels - 1),
           row);
  }
  if (data.mode == DatasetMode::FiniteSample) {
    require(data.stratum.size() == n, "stratum column length differs from outcome");
    for (int s : data.stratum)
      require(s >= 0 && static_cast<std::size_t>(s) < data.stratum_labels.size(),
              "stratum id out of range");
  } else {
    require(data.covariates.size() == n * data.num_covariates(),
            "covariate matrix has the wrong size");
    for (std::size_t k = 0; k < data.covariates.size(); ++k)
      if (!std::isfinite(data.covariates[k])) {
        auto row = static_cast<std::int64_t>(k / data.num_covariates() + 1);
        fail(ErrorCode::NonFiniteValue, "non-finite covariate in row " + std::to_string(row), row);
      }
  }
  for (const auto& [key, values] : data.extra)
    require(values.size() == n, "column '" + key + "' has the wrong length");
}

namespace {
int infer_levels(const std::vector<int>& w, int levels) {
  if (levels > 0) return levels;
  int mx = 1;
  for (int v : w) mx = std::max(mx, v);
  return mx + 1;
}
}  // namespace

Dataset make_finite_dataset(std::vector<double> y, std::vector<int> w,
                            const std::vector<std::int64_t>& labels, int levels) {
  require(labels.size() == y.size(), "stratum labels length differs from outcome");
  Dataset d;
  d.mode = DatasetMode::FiniteSample;
  d.levels = infer_levels(w, levels);
  d.y = std::move(y);
  d.w = std::move(w);
  std::vector<std::int64_t> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  d.stratum_labels = sorted;
  d.stratum.reserve(labels.size());
  for (auto l : labels)
    d.stratum.push_back(static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), l) - sorted.begin()));
  validate(d);
  return d;
}

Dataset make_large_dataset(std::vector<double> y, std::vector<int> w,
                           std::vector<double> covariates,
                           std::vector<std::string> names, int levels) {
  Dataset d;
  d.mode = DatasetMode::LargeSample;
  d.levels = infer_levels(w, levels);
  d.y = std::move(y);
  d.w = std::move(w);
  d.covariates = std::move(covariates);
  d.covariate_names = std::move(names);
  validate(d);
  return d;
}

StrataIndex build_strata(const std::vector<int>& stratum, std::size_t num_strata,
                         bool require_pairs) {
  StrataIndex idx;
  idx.members.assign(num_strata, {});
  idx.stratum_of = stratum;
  for (std::size_t i = 0; i < stratum.size(); ++i) {
    require(stratum[i] >= 0 && static_cast<std::size_t>(stratum[i]) < num_strata,
            "stratum id out of range");
    idx.members[static_cast<std::size_t>(stratum[i])].push_back(i);
  }
  idx.counts.resize(num_strata);
  idx.labels.resize(num_strata);
  for (std::size_t k = 0; k < num_strata; ++k) {
    idx.counts[k] = idx.members[k].size();
    idx.labels[k] = static_cast<std::int64_t>(k);
  }
  if (require_pairs)
    for (std::size_t k = 0; k < num_strata; ++k)
      if (idx.counts[k] < 2)
        fail(ErrorCode::StratumTooSmall,
             "stratum " + std::to_string(k) + " has fewer than 2 observations",
             static_cast<std::int64_t>(k));
  return idx;
}

StrataIndex build_strata(const Dataset& data, bool require_pairs) {
  if (data.mode != DatasetMode::FiniteSample)
    fail(ErrorCode::WrongDatasetMode, "strata need a finite-sample dataset");
  StrataIndex idx = build_strata(data.stratum, data.num_strata(), false);
  idx.labels = data.stratum_labels;
  if (require_pairs)
    for (std::size_t k = 0; k < idx.num_strata(); ++k)
      if (idx.counts[k] < 2)
        fail(ErrorCode::StratumTooSmall,
             "stratum " + std::to_string(idx.labels[k]) + " has fewer than 2 observations",
             idx.labels[k]);
  return idx;
}

std::vector<std::size_t> occupancy(const std::vector<int>& w,
                                   const StrataIndex& strata, int level) {
  std::vector<std::size_t> out(strata.num_strata(), 0);
  for (std::size_t k = 0; k < strata.num_strata(); ++k)
    for (std::size_t i : strata.members[k])
      if (w[i] == level) ++out[k];
  return out;
}

std::vector<std::size_t> occupancy(const Dataset& data, const StrataIndex& strata,
                                   int level) {
  return occupancy(data.w, strata, level);
}

}  // namespace spw
