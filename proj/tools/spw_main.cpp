#include <spw/spw.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Failure carrying the exit code the process should return.
struct CliError {
  int exit_code;
  json detail;
};

int exit_code_for(spw_status s) {
  switch (spw_status_category(s)) {
    case SPW_CATEGORY_CONFIG: return 2;
    case SPW_CATEGORY_DATA: return 3;
    case SPW_CATEGORY_NUMERIC: return 4;
    default: return 1;
  }
}

void check(spw_status s) {
  if (s == SPW_OK) return;
  json d;
  d["error"] = spw_status_name(s);
  static const char* cats[] = {"none", "config", "data", "numeric", "internal"};
  d["category"] = cats[spw_status_category(s)];
  d["message"] = spw_last_error();
  if (spw_last_error_index() >= 0) d["index"] = spw_last_error_index();
  throw CliError{exit_code_for(s), d};
}

[[noreturn]] void config_error(const std::string& msg) {
  json d;
  d["error"] = "InvalidArgument";
  d["category"] = "config";
  d["message"] = msg;
  throw CliError{2, d};
}

template <typename F>
std::string fetch(F&& call) {
  size_t needed = 0;
  spw_status s = call(nullptr, 0, &needed);
  if (s != SPW_E_BUFFER_TOO_SMALL) check(s);
  std::string buf(needed, '\0');
  check(call(buf.data(), buf.size(), &needed));
  buf.resize(needed - 1);
  return buf;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Dataset = Handle<spw_dataset, spw_dataset_free>;
using Fit = Handle<spw_fit, spw_fit_free>;
using PValues = Handle<spw_pvalues, spw_pvalues_free>;
using Study = Handle<spw_study, spw_study_free>;
using Report = Handle<spw_check_report, spw_check_report_free>;

struct Globals {
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string out = "spw_out";
  std::string config;
};

struct DataOpts {
  std::string path;
  std::string y = "y";
  std::string w = "w";
};

struct EstimateOpts {
  DataOpts data;
  std::string x;
  std::string propensity = "e";
  double nu = 1.0;
  std::string basis = "1";
  std::string method = "gpw";
  double level = 0.95;
};

struct FpwOpts {
  DataOpts data;
  std::string stratum = "x";
  std::vector<std::string> bounds;
  std::string kappa = "-1,1";
};

struct TestOpts {
  DataOpts data;
  std::string stratum = "x";
  std::string grid;
  double c1 = 0.0;
  std::vector<std::string> boxes;
  std::size_t draws = 2000;
  std::string statistic = "scaled_ate";
  int resolution = 5;
  double alpha = 0.05;
};

struct SimOpts {
  std::string dgp = "large";
  std::size_t n = 0;
  std::size_t reps = 500;
  double lambda = 0.5;
  std::string estimators;
  std::string basis = "1,x";
  bool homogeneous = false;
  double level = 0.95;
  std::size_t density_points = 256;
};

struct CheckOpts {
  std::vector<std::string> kinds;
};

struct State {
  Globals g;
  EstimateOpts est;
  FpwOpts fpw;
  TestOpts test;
  SimOpts sim;
  CheckOpts chk;
  bool version = false;
};

void add_data_opts(CLI::App* sub, DataOpts& d) {
  sub->add_option("--data", d.path, "input CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--y", d.y, "outcome column");
  sub->add_option("--w", d.w, "treatment column");
}

void build(CLI::App& app, State& st) {
  app.option_defaults()->always_capture_default();
  app.add_flag("--version", st.version, "print the version and exit");
  app.add_option("--seed", st.g.seed, "random seed");
  app.add_option("--threads", st.g.threads, "worker cap (0 = all cores)");
  app.add_option("--out", st.g.out, "output directory");
  app.add_option("--config", st.g.config, "JSON config; flags override its values")
      ->check(CLI::ExistingFile);
  app.require_subcommand(0, 1);
  app.fallthrough();

  auto* est = app.add_subcommand("estimate", "large-sample GPW / alternative estimators");
  add_data_opts(est, st.est.data);
  est->add_option("--x", st.est.x, "covariate columns (comma list, default: all others)");
  est->add_option("--propensity-col", st.est.propensity, "propensity column");
  est->add_option("--nu", st.est.nu, "GPW index nu (-1 is IPW)");
  est->add_option("--basis", st.est.basis, "basis terms, e.g. 1,x,x^2");
  est->add_option("--method", st.est.method,
                  "gpw, robinson, half-weight, one-sided-control or overlap");
  est->add_option("--level", st.est.level, "Wald interval level");

  auto* fpw = app.add_subcommand("fpw", "finite-sample FPW set estimate");
  add_data_opts(fpw, st.fpw.data);
  fpw->add_option("--stratum", st.fpw.stratum, "stratum column");
  fpw->add_option("--bounds", st.fpw.bounds, "outcome bounds per treatment, w=K:lo,hi")
      ->required()
      ->allow_extra_args(false);
  fpw->add_option("--kappa", st.fpw.kappa, "contrast weights, comma list");

  auto* test = app.add_subcommand("test", "p-value bounds for the weak null");
  add_data_opts(test, st.test.data);
  test->add_option("--stratum", st.test.stratum, "stratum column");
  test->add_option("--grid", st.test.grid, "null grid lo:hi:step or comma list")->required();
  test->add_option("--c1", st.test.c1, "effect heterogeneity bound");
  test->add_option("--lambda-box", st.test.boxes, "k=LABEL:lo,hi per stratum")
      ->allow_extra_args(false);
  test->add_option("--draws", st.test.draws, "Monte-Carlo draws per model");
  test->add_option("--statistic", st.test.statistic, "scaled_ate, wmd or ipw_fs");
  test->add_option("--resolution", st.test.resolution, "grid points per lambda interval");
  test->add_option("--alpha", st.test.alpha, "level for the confidence set");

  auto* sim = app.add_subcommand("simulate", "simulation study");
  sim->add_option("--dgp", st.sim.dgp, "large or finite");
  sim->add_option("--n", st.sim.n, "sample size (default 2000 large, 50 finite)");
  sim->add_option("--reps", st.sim.reps, "replications");
  sim->add_option("--lambda", st.sim.lambda, "finite design treatment probability");
  sim->add_option("--estimators", st.sim.estimators, "comma list of estimators");
  sim->add_option("--basis", st.sim.basis, "basis for large-sample estimators");
  sim->add_flag("--homogeneous", st.sim.homogeneous, "finite design without effect noise");
  sim->add_option("--level", st.sim.level, "Wald interval level");
  sim->add_option("--density-points", st.sim.density_points, "kernel density grid size");

  auto* chk = app.add_subcommand("check", "residual property suite");
  chk->add_option("--kind", st.chk.kinds, "extra residual kind as a JSON object")
      ->allow_extra_args(false);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  config_error("cannot read a number from '" + s + "' in " + what);
}

std::string value_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

const std::vector<std::string> kSkip{"--help", "--version", "--config"};

bool skipped(const CLI::Option* o) {
  for (const auto& s : kSkip)
    if (o->check_lname(s.substr(2))) return true;
  return false;
}

// Fills options not given on the command line from a JSON object.
void apply_config(CLI::App* app, const json& values) {
  if (!values.is_object()) config_error("config section must be a JSON object");
  for (auto it = values.begin(); it != values.end(); ++it) {
    CLI::Option* opt = app->get_option_no_throw("--" + it.key());
    if (opt == nullptr || skipped(opt))
      config_error("unknown setting '" + it.key() + "' for " +
                   (app->get_name().empty() ? std::string("global options") : app->get_name()));
    if (opt->count() > 0) continue;
    if (it.value().is_array() && it.value().empty()) continue;
    if (it.value().is_array()) {
      for (const auto& v : it.value()) opt->add_result(value_string(v));
    } else {
      opt->add_result(value_string(it.value()));
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      config_error("config value for '" + it.key() + "': " + e.what());
    }
  }
}

json typed(const std::string& s) {
  json v = json::parse(s, nullptr, false);
  if (!v.is_discarded() && (v.is_number() || v.is_boolean())) return v;
  return s;
}

json echo_options(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* o : app->get_options()) {
    if (skipped(o) || o->get_lnames().empty()) continue;
    const std::string key = o->get_lnames().front();
    const bool many = o->get_items_expected_max() > 1;
    if (o->count() > 0) {
      const auto& r = o->results();
      if (many) {
        j[key] = json::array();
        for (const auto& v : r) j[key].push_back(typed(v));
      } else {
        j[key] = typed(r.back());
      }
    } else if (many) {
      j[key] = json::array();
    } else if (!o->get_default_str().empty()) {
      j[key] = typed(o->get_default_str());
    }
  }
  return j;
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      json d;
      d["error"] = "Io";
      d["category"] = "config";
      d["message"] = "cannot create output directory '" + dir + "': " + ec.message();
      throw CliError{2, d};
    }
  }

  void write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    if (!f) {
      json d;
      d["error"] = "Io";
      d["category"] = "config";
      d["message"] = "cannot write '" + p.string() + "'";
      throw CliError{2, d};
    }
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  return out;
}

void load(Dataset& ds, const DataOpts& d, spw_mode mode, const std::string& x,
          const std::string& required) {
  spw_csv_schema schema;
  spw_csv_schema_init(&schema);
  schema.y = d.y.c_str();
  schema.w = d.w.c_str();
  schema.mode = mode;
  schema.x = x.empty() ? nullptr : x.c_str();
  schema.required = required.empty() ? nullptr : required.c_str();
  check(spw_dataset_load_csv(d.path.c_str(), &schema, ds.out()));
}

int run_estimate(const State& st, Output& out, json& notes) {
  const auto& o = st.est;
  Dataset ds;
  load(ds, o.data, SPW_MODE_LARGE, o.x, o.propensity);
  std::vector<double> e(spw_dataset_size(ds.get()));
  check(spw_dataset_column(ds.get(), o.propensity.c_str(), e.data(), e.size()));
  Fit fit;
  if (o.method == "gpw")
    check(spw_gpw_estimate(ds.get(), e.data(), e.size(), o.basis.c_str(), o.nu, fit.out()));
  else
    check(spw_alt_estimate(ds.get(), e.data(), e.size(), o.basis.c_str(), o.method.c_str(),
                           fit.out()));
  const std::string text = fetch([&](char* b, size_t c, size_t* n) {
    return spw_fit_json(fit.get(), o.level, b, c, n);
  });
  out.write("fit.json", text);
  notes["n"] = spw_fit_n(fit.get());
  std::cout << text << "\n";
  return 0;
}

int run_fpw(const State& st, Output& out, json&) {
  const auto& o = st.fpw;
  Dataset ds;
  load(ds, o.data, SPW_MODE_FINITE, o.stratum, "");
  const int L = spw_dataset_levels(ds.get());
  std::vector<double> lo(static_cast<size_t>(L)), hi(static_cast<size_t>(L));
  std::vector<bool> seen(static_cast<size_t>(L), false);
  for (const auto& b : o.bounds) {
    // w=K:lo,hi
    const auto colon = b.find(':');
    if (b.rfind("w=", 0) != 0 || colon == std::string::npos)
      config_error("bounds must look like w=K:lo,hi, got '" + b + "'");
    const double k = to_number(b.substr(2, colon - 2), "bounds");
    const auto parts = split(b.substr(colon + 1), ',');
    if (parts.size() != 2) config_error("bounds must look like w=K:lo,hi, got '" + b + "'");
    if (k < 0 || k >= L || k != static_cast<int>(k))
      config_error("bounds name treatment " + b.substr(2, colon - 2) + " outside 0.." +
                   std::to_string(L - 1));
    const auto w = static_cast<size_t>(k);
    if (seen[w]) config_error("treatment " + std::to_string(w) + " has two bounds");
    seen[w] = true;
    lo[w] = to_number(parts[0], "bounds");
    hi[w] = to_number(parts[1], "bounds");
  }
  for (size_t w = 0; w < seen.size(); ++w)
    if (!seen[w]) config_error("missing --bounds for treatment " + std::to_string(w));
  std::vector<double> kappa;
  for (const auto& s : split(o.kappa, ',')) kappa.push_back(to_number(s, "kappa"));
  const std::string text = fetch([&](char* b, size_t c, size_t* n) {
    return spw_fpw_json(ds.get(), lo.data(), hi.data(), kappa.data(), kappa.size(), b, c, n);
  });
  out.write("fpw.json", text);
  std::cout << text << "\n";
  return 0;
}

int run_test(const State& st, Output& out, json&) {
  const auto& o = st.test;
  Dataset ds;
  load(ds, o.data, SPW_MODE_FINITE, o.stratum, "");
  std::vector<const char*> boxes;
  for (const auto& b : o.boxes) boxes.push_back(b.c_str());
  spw_test_config cfg;
  spw_test_config_init(&cfg);
  cfg.statistic = o.statistic.c_str();
  cfg.grid = o.grid.c_str();
  cfg.lambda_boxes = boxes.data();
  cfg.box_count = boxes.size();
  cfg.resolution = o.resolution;
  cfg.c1 = o.c1;
  cfg.draws = o.draws;
  cfg.seed = st.g.seed;
  cfg.threads = st.g.threads;
  PValues pv;
  check(spw_pvalue_bounds(ds.get(), &cfg, pv.out()));
  out.write("pvalues.csv", fetch([&](char* b, size_t c, size_t* n) {
              return spw_pvalues_csv(pv.get(), b, c, n);
            }));
  const std::string meta = fetch([&](char* b, size_t c, size_t* n) {
    return spw_pvalues_json(pv.get(), o.alpha, b, c, n);
  });
  out.write("pvalues.json", meta);
  std::cout << meta << "\n";
  return 0;
}

int run_simulate(const State& st, Output& out, json& notes) {
  const auto& o = st.sim;
  json cfg;
  cfg["dgp"] = o.dgp;
  if (o.n > 0) cfg["n"] = o.n;
  cfg["reps"] = o.reps;
  cfg["lambda"] = o.lambda;
  cfg["homogeneous_effect"] = o.homogeneous;
  if (!o.estimators.empty()) cfg["estimators"] = o.estimators;
  cfg["basis"] = o.basis;
  cfg["level"] = o.level;
  cfg["seed"] = st.g.seed;
  cfg["threads"] = st.g.threads;
  Study study;
  check(spw_simulate(cfg.dump().c_str(), study.out()));
  const std::string summary =
      fetch([&](char* b, size_t c, size_t* n) { return spw_study_json(study.get(), b, c, n); });
  out.write("summary.json", summary);
  json skipped = json::array();
  for (size_t i = 0; i < spw_study_estimators(study.get()); ++i) {
    const std::string label = sanitize(fetch(
        [&](char* b, size_t c, size_t* n) { return spw_study_label(study.get(), i, b, c, n); }));
    out.write("estimates_" + label + ".csv", fetch([&](char* b, size_t c, size_t* n) {
                return spw_study_estimates_csv(study.get(), i, b, c, n);
              }));
    for (size_t j = 0; j < spw_study_columns(study.get(), i); ++j) {
      size_t needed = 0;
      spw_status s = spw_study_density_csv(study.get(), i, j, o.density_points, nullptr, 0, &needed);
      if (s == SPW_E_TOO_FEW_SAMPLES || s == SPW_E_DEGENERATE_SAMPLES) {
        skipped.push_back(label + "[" + std::to_string(j) + "]: " + spw_last_error());
        continue;
      }
      out.write("density_" + label + "_" + std::to_string(j) + ".csv",
                fetch([&](char* b, size_t c, size_t* n) {
                  return spw_study_density_csv(study.get(), i, j, o.density_points, b, c, n);
                }));
    }
  }
  if (!skipped.empty()) notes["densities_skipped"] = skipped;
  std::cout << summary << "\n";
  return 0;
}

int run_check(const State& st, Output& out, json&) {
  std::vector<const char*> kinds;
  for (const auto& k : st.chk.kinds) kinds.push_back(k.c_str());
  Report rep;
  check(spw_check_run(kinds.data(), kinds.size(), rep.out()));
  const std::string table =
      fetch([&](char* b, size_t c, size_t* n) { return spw_check_table(rep.get(), b, c, n); });
  out.write("check.txt", table);
  out.write("check.json", fetch([&](char* b, size_t c, size_t* n) {
              return spw_check_json(rep.get(), b, c, n);
            }));
  std::cout << table;
  return spw_check_all_as_expected(rep.get()) ? 0 : 1;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    config_error("cannot parse config '" + path + "': " + e.what());
  }
  if (j.is_object() && j.contains("config")) j = j["config"];  // a manifest
  if (!j.is_object()) config_error("config must be a JSON object");
  return j;
}

int parse(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? -1 : 2;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto app = std::make_unique<CLI::App>("Stable probability weighting estimators and tests", "spw");
  auto st = std::make_unique<State>();
  build(*app, *st);
  if (int rc = parse(*app, args); rc != 0) return rc < 0 ? 0 : rc;
  if (st->version) {
    std::cout << "spw " << spw_version() << "\n";
    return 0;
  }

  json cfg;
  if (!st->g.config.empty()) {
    cfg = load_config(st->g.config);
    if (app->get_subcommands().empty()) {
      if (!cfg.contains("command") || !cfg["command"].is_string())
        config_error("no subcommand given and the config names none");
      args.push_back(cfg["command"].get<std::string>());
      app = std::make_unique<CLI::App>("Stable probability weighting estimators and tests", "spw");
      st = std::make_unique<State>();
      build(*app, *st);
      if (int rc = parse(*app, args); rc != 0) return rc < 0 ? 0 : rc;
    }
  }
  if (app->get_subcommands().empty()) {
    std::cout << app->help();
    return 2;
  }
  CLI::App* sub = app->get_subcommands().front();
  if (!cfg.empty()) {
    if (cfg.contains("command") && cfg["command"] != sub->get_name())
      config_error("config is for '" + cfg["command"].get<std::string>() + "', not '" +
                   sub->get_name() + "'");
    json globals = json::object();
    for (const char* k : {"seed", "threads", "out"})
      if (cfg.contains(k)) globals[k] = cfg[k];
    apply_config(app.get(), globals);
    if (cfg.contains("options")) apply_config(sub, cfg["options"]);
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (it.key() != "command" && it.key() != "options" && it.key() != "seed" &&
          it.key() != "threads" && it.key() != "out")
        config_error("unknown config key '" + it.key() + "'");
  }

  json echo;
  echo["command"] = sub->get_name();
  echo["seed"] = st->g.seed;
  echo["threads"] = st->g.threads;
  echo["out"] = st->g.out;
  echo["options"] = echo_options(sub);

  Output out(st->g.out);
  json notes = json::object();
  const std::string started = timestamp();
  int rc = 0;
  const std::string& name = sub->get_name();
  if (name == "estimate")
    rc = run_estimate(*st, out, notes);
  else if (name == "fpw")
    rc = run_fpw(*st, out, notes);
  else if (name == "test")
    rc = run_test(*st, out, notes);
  else if (name == "simulate")
    rc = run_simulate(*st, out, notes);
  else
    rc = run_check(*st, out, notes);

  json manifest;
  manifest["tool"] = "spw";
  manifest["version"] = spw_version();
  manifest["build"] = json::parse(spw_build_info());
  manifest["started_at"] = started;
  manifest["finished_at"] = timestamp();
  manifest["seed"] = st->g.seed;
  manifest["config"] = echo;
  manifest["outputs"] = out.files();
  manifest["exit_code"] = rc;
  if (!notes.empty()) manifest["notes"] = notes;
  out.write("manifest.json", manifest.dump(2));
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CliError& e) {
    std::cerr << e.detail.dump() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    json d;
    d["error"] = "Internal";
    d["category"] = "internal";
    d["message"] = e.what();
    std::cerr << d.dump() << "\n";
    return 1;
  }
}
