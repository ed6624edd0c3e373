#include "spw/spw.h"

#include <cmath>
#include <cstring>
#include <new>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include <boost/version.hpp>

#include "spw/check.hpp"
#include "spw/error.hpp"
#include "spw/json_io.hpp"

#ifndef SPW_VERSION_STRING
#define SPW_VERSION_STRING "0.0.0"
#endif

struct spw_dataset {
  spw::Dataset data;
  std::optional<spw::StrataIndex> strata;

  const spw::StrataIndex& index() {
    if (!strata) strata = spw::build_strata(data, true);
    return *strata;
  }
};

struct spw_residual_kind {
  spw::ResidualKind kind;
};

struct spw_check_report {
  spw::CheckReport report;
};

struct spw_fit {
  spw::GpwFit fit;
};

struct spw_pvalues {
  spw::PValueBounds bounds;
  std::vector<std::int64_t> plug_in_strata;
};

struct spw_study {
  spw::StudyResult result;
};

namespace {

thread_local std::string g_last_error;
thread_local std::int64_t g_last_index = -1;

spw_status fail_with(spw_status s, const std::string& msg, std::int64_t index = -1) {
  g_last_error = msg;
  g_last_index = index;
  return s;
}

template <typename F>
spw_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    g_last_index = -1;
    return SPW_OK;
  } catch (const spw::Error& e) {
    return fail_with(static_cast<spw_status>(static_cast<int>(e.code()) + 1), e.what(),
                     e.index().value_or(-1));
  } catch (const spw::json::exception& e) {
    return fail_with(SPW_E_INVALID_ARGUMENT, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(SPW_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(SPW_E_INTERNAL, e.what());
  } catch (...) {
    return fail_with(SPW_E_INTERNAL, "unknown failure");
  }
}

static_assert(static_cast<int>(spw::ErrorCode::DegenerateSamples) + 1 == SPW_E_DEGENERATE_SAMPLES);
static_assert(static_cast<int>(spw::ErrorCode::SingularDesign) + 1 == SPW_E_SINGULAR_DESIGN);

void need(const void* p, const char* what) {
  spw::require(p != nullptr, std::string(what) + " must not be NULL");
}

spw_status copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf == nullptr || cap < s.size() + 1) {
    if (buf && cap > 0) buf[0] = '\0';
    return fail_with(SPW_E_BUFFER_TOO_SMALL,
                     "buffer of " + std::to_string(cap) + " bytes is too small, need " +
                         std::to_string(s.size() + 1));
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  g_last_error.clear();
  g_last_index = -1;
  return SPW_OK;
}

template <typename Make>
spw_status string_out(char* buf, size_t cap, size_t* needed, Make&& make) {
  std::string s;
  spw_status st = guarded([&] { s = make(); });
  if (st != SPW_OK) return st;
  return copy_string(s, buf, cap, needed);
}

std::vector<std::string> split_list(const char* s) {
  std::vector<std::string> out;
  if (s == nullptr) return out;
  std::string cur;
  for (const char* p = s;; ++p) {
    if (*p == ',' || *p == '\0') {
      auto b = cur.find_first_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
      cur.clear();
      if (*p == '\0') break;
    } else {
      cur += *p;
    }
  }
  return out;
}

spw::FsConfig fs_config(const double* lo, const double* hi, const double* kappa, size_t levels,
                        int ds_levels) {
  need(lo, "bound_lo");
  need(hi, "bound_hi");
  need(kappa, "kappa");
  spw::require(levels == static_cast<size_t>(ds_levels),
               "expected " + std::to_string(ds_levels) + " treatment levels, got " +
                   std::to_string(levels));
  spw::FsConfig c;
  for (size_t w = 0; w < levels; ++w) {
    c.bounds.push_back({lo[w], hi[w]});
    c.kappa.push_back(kappa[w]);
  }
  c.validate(ds_levels);
  return c;
}

std::vector<double> kappa_vec(const double* kappa, size_t levels, int ds_levels) {
  need(kappa, "kappa");
  spw::require(levels == static_cast<size_t>(ds_levels), "kappa length differs from levels");
  return {kappa, kappa + levels};
}

spw::StudyConfig study_config(const spw::json& j) {
  spw::require(j.is_object(), "simulation config must be a JSON object");
  static const std::set<std::string> known{"dgp",   "n",     "reps",   "lambda", "homogeneous_effect",
                                           "estimators", "seed", "threads", "basis", "level",
                                           "bounds", "kappa"};
  for (auto it = j.begin(); it != j.end(); ++it)
    spw::require(known.count(it.key()) > 0, "unknown simulation setting '" + it.key() + "'");
  spw::StudyConfig c;
  c.dgp.tag = spw::parse_dgp_tag(j.value("dgp", std::string("large")));
  spw::require(c.dgp.tag != spw::DgpTag::Custom, "custom designs are only available in C++");
  const bool finite = c.dgp.tag == spw::DgpTag::FiniteSampleAppendix;
  auto count = [&](const char* key, std::size_t def) -> std::size_t {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    spw::require(v.is_number_integer() && v.get<std::int64_t>() >= 0,
                 std::string("'") + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
  };
  c.dgp.n = count("n", finite ? 50 : 2000);
  c.reps = count("reps", 500);
  c.seed = count("seed", 42);
  c.threads = static_cast<unsigned>(count("threads", 1));
  if (j.contains("lambda")) c.dgp.lambda = j.at("lambda").get<double>();
  if (j.contains("homogeneous_effect")) c.dgp.homogeneous_effect = j.at("homogeneous_effect").get<bool>();
  if (j.contains("basis")) c.basis = j.at("basis").get<std::string>();
  if (j.contains("level")) c.level = j.at("level").get<double>();
  std::vector<std::string> names;
  if (j.contains("estimators")) {
    const auto& e = j.at("estimators");
    if (e.is_string()) {
      names = split_list(e.get<std::string>().c_str());
    } else {
      for (const auto& v : e) names.push_back(v.get<std::string>());
    }
  } else {
    names = finite ? std::vector<std::string>{"fpw", "ipw", "wmd"}
                   : std::vector<std::string>{"npw", "ipw"};
  }
  for (const auto& n : names) c.estimators.push_back(spw::EstimatorSpec::parse(n, finite));
  if (j.contains("bounds")) {
    c.fs.bounds.clear();
    for (const auto& b : j.at("bounds")) {
      spw::require(b.is_array() && b.size() == 2, "'bounds' entries must be [lo, hi]");
      c.fs.bounds.push_back({b[0].get<double>(), b[1].get<double>()});
    }
  }
  if (j.contains("kappa")) c.fs.kappa = j.at("kappa").get<std::vector<double>>();
  return c;
}

const spw::EstimatorResult& study_entry(const spw_study* s, size_t i) {
  need(s, "study");
  spw::require(i < s->result.estimators.size(), "estimator index out of range");
  return s->result.estimators[i];
}

}  // namespace

extern "C" {

const char* spw_version(void) { return SPW_VERSION_STRING; }

const char* spw_build_info(void) {
  static const std::string info = [] {
    spw::json j;
    j["spw"] = SPW_VERSION_STRING;
    j["compiler"] = __VERSION__;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
    j["boost"] = BOOST_LIB_VERSION;
    j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    return j.dump();
  }();
  return info.c_str();
}

const char* spw_status_name(spw_status status) {
  switch (status) {
    case SPW_OK: return "Ok";
    case SPW_E_BUFFER_TOO_SMALL: return "BufferTooSmall";
    case SPW_E_INTERNAL: return "Internal";
    default: break;
  }
  const int c = static_cast<int>(status) - 1;
  if (c >= 0 && c <= static_cast<int>(spw::ErrorCode::DegenerateSamples))
    return spw::error_code_name(static_cast<spw::ErrorCode>(c)).data();
  return "Unknown";
}

spw_category spw_status_category(spw_status status) {
  if (status == SPW_OK) return SPW_CATEGORY_NONE;
  if (status == SPW_E_BUFFER_TOO_SMALL) return SPW_CATEGORY_CONFIG;
  const int c = static_cast<int>(status) - 1;
  if (c < 0 || c > static_cast<int>(spw::ErrorCode::DegenerateSamples))
    return SPW_CATEGORY_INTERNAL;
  switch (spw::error_category(static_cast<spw::ErrorCode>(c))) {
    case spw::ErrorCategory::Config: return SPW_CATEGORY_CONFIG;
    case spw::ErrorCategory::Data: return SPW_CATEGORY_DATA;
    case spw::ErrorCategory::Numeric: return SPW_CATEGORY_NUMERIC;
  }
  return SPW_CATEGORY_INTERNAL;
}

const char* spw_last_error(void) { return g_last_error.c_str(); }
int64_t spw_last_error_index(void) { return g_last_index; }

/* datasets */

void spw_csv_schema_init(spw_csv_schema* schema) {
  if (!schema) return;
  schema->y = "y";
  schema->w = "w";
  schema->x = nullptr;
  schema->required = nullptr;
  schema->mode = SPW_MODE_LARGE;
  schema->max_treatment = -1;
}

spw_status spw_dataset_load_csv(const char* path, const spw_csv_schema* schema,
                                spw_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    spw::CsvSchema s;
    if (schema) {
      if (schema->y) s.y = schema->y;
      if (schema->w) s.w = schema->w;
      s.mode = schema->mode == SPW_MODE_FINITE ? spw::DatasetMode::FiniteSample : spw::DatasetMode::LargeSample;
      if (schema->x) {
        s.x = split_list(schema->x);
      } else if (s.mode == spw::DatasetMode::LargeSample) {
        s.x.clear();
      }
      s.required = split_list(schema->required);
      if (schema->max_treatment >= 0) s.max_treatment = schema->max_treatment;
    }
    auto ds = std::make_unique<spw_dataset>();
    ds->data = spw::load_csv(path, s);
    *out = ds.release();
  });
}

spw_status spw_dataset_from_finite(size_t n, const double* y, const int* w, const int64_t* strata,
                                   int levels, spw_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(y, "y");
    need(w, "w");
    need(strata, "strata");
    auto ds = std::make_unique<spw_dataset>();
    ds->data = spw::make_finite_dataset({y, y + n}, {w, w + n}, {strata, strata + n}, levels);
    *out = ds.release();
  });
}

spw_status spw_dataset_from_large(size_t n, const double* y, const int* w, size_t p,
                                  const double* covariates, const char* const* names, int levels,
                                  spw_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(y, "y");
    need(w, "w");
    if (p > 0) {
      need(covariates, "covariates");
      need(names, "names");
    }
    std::vector<std::string> nm;
    for (size_t j = 0; j < p; ++j) {
      need(names[j], "covariate name");
      nm.emplace_back(names[j]);
    }
    auto ds = std::make_unique<spw_dataset>();
    ds->data = spw::make_large_dataset({y, y + n}, {w, w + n},
                                       p ? std::vector<double>(covariates, covariates + n * p)
                                         : std::vector<double>{},
                                       std::move(nm), levels);
    *out = ds.release();
  });
}

spw_status spw_dataset_add_column(spw_dataset* ds, const char* name, const double* values,
                                  size_t n) {
  return guarded([&] {
    need(ds, "dataset");
    need(name, "name");
    need(values, "values");
    spw::require(n == ds->data.size(), "column length differs from dataset");
    spw::require(ds->data.find_extra(name) == nullptr,
                 std::string("column '") + name + "' already exists");
    ds->data.extra.emplace_back(name, std::vector<double>(values, values + n));
  });
}

void spw_dataset_free(spw_dataset* ds) { delete ds; }
size_t spw_dataset_size(const spw_dataset* ds) { return ds ? ds->data.size() : 0; }
int spw_dataset_levels(const spw_dataset* ds) { return ds ? ds->data.levels : 0; }
spw_mode spw_dataset_mode(const spw_dataset* ds) {
  return ds && ds->data.mode == spw::DatasetMode::FiniteSample ? SPW_MODE_FINITE : SPW_MODE_LARGE;
}
size_t spw_dataset_num_strata(const spw_dataset* ds) {
  return ds && ds->data.mode == spw::DatasetMode::FiniteSample ? ds->data.num_strata() : 0;
}

spw_status spw_dataset_column(const spw_dataset* ds, const char* name, double* out, size_t cap) {
  return guarded([&] {
    need(ds, "dataset");
    need(name, "name");
    std::vector<double> v = ds->data.column(name);
    spw::require(out != nullptr && cap >= v.size(), "output array is too small for the column");
    std::copy(v.begin(), v.end(), out);
  });
}

spw_status spw_dataset_write_csv(const spw_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    spw::write_csv(path, ds->data);
  });
}

/* residuals */

spw_status spw_residual_kind_parse(const char* text, spw_residual_kind** out) {
  return guarded([&] {
    need(text, "json");
    need(out, "out");
    *out = nullptr;
    auto k = std::make_unique<spw_residual_kind>();
    k->kind = spw::residual_kind_from_json(spw::json::parse(text));
    *out = k.release();
  });
}

void spw_residual_kind_free(spw_residual_kind* kind) { delete kind; }

spw_status spw_residual_kind_json(const spw_residual_kind* kind, char* buf, size_t cap,
                                  size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(kind, "kind");
    return spw::dump17(spw::residual_kind_to_json(kind->kind), -1);
  });
}

void spw_nuisance_init(spw_nuisance* n) {
  if (!n) return;
  *n = spw_nuisance{};
  n->e = 0.5;
}

spw_status spw_residual_eval(const spw_residual_kind* kind, double y, int w, double tau,
                             const spw_nuisance* nuis, double* out) {
  return guarded([&] {
    need(kind, "kind");
    need(nuis, "nuisance");
    need(out, "out");
    spw::NuisancePoint p;
    p.e = nuis->e;
    p.mu0 = nuis->mu0;
    p.mu1 = nuis->mu1;
    if (nuis->has_eta) p.eta = nuis->eta;
    if (nuis->has_r) p.r = nuis->r;
    if (nuis->has_stabilizer) p.stabilizer = nuis->stabilizer;
    if (nuis->phi) p.phi.assign(nuis->phi, nuis->phi + nuis->levels);
    if (nuis->gamma) p.gamma.assign(nuis->gamma, nuis->gamma + nuis->levels);
    *out = spw::eval_residual(kind->kind, spw::Observation{y, w}, tau, p);
  });
}

spw_status spw_check_run(const char* const* extra_kinds, size_t count, spw_check_report** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto kinds = spw::builtin_kinds();
    for (size_t i = 0; i < count; ++i) {
      need(extra_kinds, "extra_kinds");
      need(extra_kinds[i], "kind");
      auto j = spw::json::parse(extra_kinds[i]);
      spw::ResidualKind k = spw::residual_kind_from_json(j);
      kinds.push_back({"custom_" + std::to_string(i + 1) + "_" + spw::residual_tag_name(k.tag), k});
    }
    auto r = std::make_unique<spw_check_report>();
    r->report = spw::run_check_suite(kinds);
    *out = r.release();
  });
}

void spw_check_report_free(spw_check_report* report) { delete report; }
int spw_check_all_as_expected(const spw_check_report* r) {
  return r && r->report.all_as_expected() ? 1 : 0;
}
size_t spw_check_rows(const spw_check_report* r) { return r ? r->report.rows.size() : 0; }

spw_status spw_check_table(const spw_check_report* r, char* buf, size_t cap, size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(r, "report");
    return r->report.to_table();
  });
}

spw_status spw_check_json(const spw_check_report* r, char* buf, size_t cap, size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(r, "report");
    return spw::dump17(spw::check_report_to_json(r->report));
  });
}

/* large-sample estimation */

spw_status spw_gpw_estimate(const spw_dataset* ds, const double* e, size_t n, const char* basis,
                            double nu, spw_fit** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(ds, "dataset");
    need(e, "e");
    need(basis, "basis");
    auto f = std::make_unique<spw_fit>();
    f->fit = spw::gpw_estimate(ds->data, {e, e + n}, spw::BasisSpec::parse(basis), nu);
    *out = f.release();
  });
}

spw_status spw_alt_estimate(const spw_dataset* ds, const double* e, size_t n, const char* basis,
                            const char* variant, spw_fit** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(ds, "dataset");
    need(e, "e");
    need(basis, "basis");
    need(variant, "variant");
    auto f = std::make_unique<spw_fit>();
    f->fit = spw::alt_estimate(ds->data, {e, e + n}, spw::BasisSpec::parse(basis),
                               spw::parse_alt_variant(variant));
    *out = f.release();
  });
}

void spw_fit_free(spw_fit* fit) { delete fit; }
size_t spw_fit_dim(const spw_fit* f) { return f ? static_cast<size_t>(f->fit.beta.size()) : 0; }
size_t spw_fit_n(const spw_fit* f) { return f ? f->fit.n : 0; }
double spw_fit_nu(const spw_fit* f) { return f ? f->fit.nu : std::nan(""); }
double spw_fit_condition(const spw_fit* f) { return f ? f->fit.condition : std::nan(""); }

spw_status spw_fit_beta(const spw_fit* f, double* out, size_t cap) {
  return guarded([&] {
    need(f, "fit");
    const auto d = static_cast<size_t>(f->fit.beta.size());
    spw::require(out != nullptr && cap >= d, "output array is too small");
    for (size_t i = 0; i < d; ++i) out[i] = f->fit.beta[static_cast<Eigen::Index>(i)];
  });
}

spw_status spw_fit_sigma(const spw_fit* f, double* out, size_t cap) {
  return guarded([&] {
    need(f, "fit");
    const auto d = static_cast<Eigen::Index>(f->fit.beta.size());
    spw::require(out != nullptr && cap >= static_cast<size_t>(d * d), "output array is too small");
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) out[r * d + c] = f->fit.sigma(r, c);
  });
}

spw_status spw_fit_wald_ci(const spw_fit* f, const double* contrast, double level, double* lo,
                           double* hi) {
  return guarded([&] {
    need(f, "fit");
    need(contrast, "contrast");
    need(lo, "lo");
    need(hi, "hi");
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(contrast, f->fit.beta.size());
    const spw::Interval ci = spw::wald_ci(f->fit, c, level);
    *lo = ci.lo;
    *hi = ci.hi;
  });
}

spw_status spw_fit_json(const spw_fit* f, double level, char* buf, size_t cap,
                        size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(f, "fit");
    return spw::dump17(spw::fit_to_json(f->fit, level));
  });
}

/* finite-sample estimation */

spw_status spw_fpw(const spw_dataset* ds, const double* bound_lo, const double* bound_hi,
                   const double* kappa, size_t levels, double* lo, double* hi, double* per_w_lo,
                   double* per_w_hi) {
  return guarded([&] {
    need(ds, "dataset");
    need(lo, "lo");
    need(hi, "hi");
    auto* mds = const_cast<spw_dataset*>(ds);
    const spw::FsConfig cfg = fs_config(bound_lo, bound_hi, kappa, levels, ds->data.levels);
    const spw::FpwResult r = spw::fpw_set(spw::make_sample(mds->data, mds->index()), cfg);
    *lo = r.theta.lo;
    *hi = r.theta.hi;
    for (size_t w = 0; w < levels; ++w) {
      if (per_w_lo) per_w_lo[w] = r.per_w[w].lo;
      if (per_w_hi) per_w_hi[w] = r.per_w[w].hi;
    }
  });
}

spw_status spw_fpw_json(const spw_dataset* ds, const double* bound_lo, const double* bound_hi,
                        const double* kappa, size_t levels, char* buf, size_t cap,
                        size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(ds, "dataset");
    auto* mds = const_cast<spw_dataset*>(ds);
    const spw::FsConfig cfg = fs_config(bound_lo, bound_hi, kappa, levels, ds->data.levels);
    const spw::FsSample s = spw::make_sample(mds->data, mds->index());
    spw::json j = spw::fpw_to_json(spw::fpw_set(s, cfg));
    j["n"] = s.n();
    j["strata"] = mds->index().num_strata();
    return spw::dump17(j);
  });
}

spw_status spw_wmd(const spw_dataset* ds, const double* kappa, size_t levels, double* out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    auto* mds = const_cast<spw_dataset*>(ds);
    *out = spw::wmd_estimate(spw::make_sample(mds->data, mds->index()),
                             kappa_vec(kappa, levels, ds->data.levels));
  });
}

spw_status spw_ipw_fs(const spw_dataset* ds, const double* kappa, size_t levels, double* out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    auto* mds = const_cast<spw_dataset*>(ds);
    *out = spw::ipw_fs_estimate(spw::make_sample(mds->data, mds->index()),
                                kappa_vec(kappa, levels, ds->data.levels));
  });
}

spw_status spw_scaled_ate(const spw_dataset* ds, int a, int b, double* out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    auto* mds = const_cast<spw_dataset*>(ds);
    *out = spw::scaled_ate(spw::make_sample(mds->data, mds->index()), a, b);
  });
}

/* inference */

void spw_test_config_init(spw_test_config* cfg) {
  if (!cfg) return;
  cfg->statistic = "scaled_ate";
  cfg->grid = nullptr;
  cfg->lambda_boxes = nullptr;
  cfg->box_count = 0;
  cfg->resolution = 5;
  cfg->c1 = 0.0;
  cfg->draws = 2000;
  cfg->seed = 0;
  cfg->threads = 1;
}

spw_status spw_pvalue_bounds(const spw_dataset* ds, const spw_test_config* cfg,
                             spw_pvalues** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(ds, "dataset");
    need(cfg, "config");
    need(cfg->grid, "grid");
    auto* mds = const_cast<spw_dataset*>(ds);
    const auto stat = spw::parse_linear_statistic(cfg->statistic ? cfg->statistic : "scaled_ate");
    const auto grid = spw::NullGrid::parse(cfg->grid);
    std::vector<spw::LambdaBox> boxes;
    for (size_t i = 0; i < cfg->box_count; ++i) {
      need(cfg->lambda_boxes, "lambda_boxes");
      need(cfg->lambda_boxes[i], "lambda box");
      boxes.push_back(spw::parse_lambda_box(cfg->lambda_boxes[i]));
    }
    const auto& idx = mds->index();
    const auto mg = spw::model_grid(boxes, idx, mds->data.w, cfg->resolution);
    auto pv = std::make_unique<spw_pvalues>();
    pv->bounds = spw::pvalue_bounds(spw::make_sample(mds->data, idx), stat, grid, mg.models,
                                    cfg->c1, cfg->draws, cfg->seed, cfg->threads);
    pv->plug_in_strata = mg.plug_in_strata;
    *out = pv.release();
  });
}

void spw_pvalues_free(spw_pvalues* pv) { delete pv; }
size_t spw_pvalues_size(const spw_pvalues* pv) { return pv ? pv->bounds.grid.size() : 0; }
double spw_pvalues_observed(const spw_pvalues* pv) {
  return pv ? pv->bounds.observed : std::nan("");
}

spw_status spw_pvalues_get(const spw_pvalues* pv, double* grid, double* p_lo, double* p_hi,
                           size_t cap) {
  return guarded([&] {
    need(pv, "pvalues");
    const auto& b = pv->bounds;
    spw::require(cap >= b.grid.size(), "output arrays are too small");
    for (size_t g = 0; g < b.grid.size(); ++g) {
      if (grid) grid[g] = b.grid[g];
      if (p_lo) p_lo[g] = b.p_lo[g];
      if (p_hi) p_hi[g] = b.p_hi[g];
    }
  });
}

spw_status spw_pvalues_csv(const spw_pvalues* pv, char* buf, size_t cap, size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(pv, "pvalues");
    return spw::pvalue_csv(pv->bounds);
  });
}

spw_status spw_pvalues_json(const spw_pvalues* pv, double alpha, char* buf, size_t cap,
                            size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(pv, "pvalues");
    spw::json j = spw::pvalue_meta_to_json(pv->bounds);
    j["plug_in_strata"] = pv->plug_in_strata;
    j["confidence_set"] = spw::confidence_set_to_json(spw::confidence_set(pv->bounds, alpha));
    return spw::dump17(j);
  });
}

/* simulation */

spw_status spw_simulate(const char* config_json, spw_study** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(config_json, "config");
    auto s = std::make_unique<spw_study>();
    s->result = spw::run_study(study_config(spw::json::parse(config_json)));
    *out = s.release();
  });
}

void spw_study_free(spw_study* study) { delete study; }
size_t spw_study_estimators(const spw_study* s) { return s ? s->result.estimators.size() : 0; }
size_t spw_study_columns(const spw_study* s, size_t i) {
  return s && i < s->result.estimators.size() ? s->result.estimators[i].columns.size() : 0;
}

spw_status spw_study_json(const spw_study* s, char* buf, size_t cap, size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    need(s, "study");
    return spw::dump17(spw::study_to_json(s->result));
  });
}

spw_status spw_study_estimates_csv(const spw_study* s, size_t i, char* buf, size_t cap,
                                   size_t* needed) {
  return string_out(buf, cap, needed, [&] { return spw::estimates_csv(study_entry(s, i)); });
}

spw_status spw_study_density_csv(const spw_study* s, size_t i, size_t j, size_t points,
                                 char* buf, size_t cap, size_t* needed) {
  return string_out(buf, cap, needed, [&] {
    const auto& e = study_entry(s, i);
    spw::require(j < e.columns.size(), "column index out of range");
    std::vector<double> v;
    for (const auto& row : e.estimates)
      if (std::isfinite(row[j])) v.push_back(row[j]);
    return spw::density_csv(spw::density_summary(v, spw::density_grid(v, points)));
  });
}

spw_status spw_study_label(const spw_study* s, size_t i, char* buf, size_t cap, size_t* needed) {
  return string_out(buf, cap, needed, [&] { return study_entry(s, i).label; });
}

}  // extern "C"
