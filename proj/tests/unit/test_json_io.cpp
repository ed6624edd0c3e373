#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/expect.hpp"
#include "spw/json_io.hpp"

using namespace spw;

TEST_CASE("17 significant digits") {
  CHECK(format17(0.1) == "0.10000000000000001");
  CHECK(format17(1.0) == "1");
  CHECK(format17(-2.5) == "-2.5");
  CHECK(format17(std::numeric_limits<double>::quiet_NaN()) == "null");
  CHECK(format17(HUGE_VAL) == "null");
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -123456.789, 6.02214076e23})
    CHECK(std::stod(format17(v)) == v);
}

TEST_CASE("dump17 layout") {
  json j;
  j["a"] = 0.1;
  j["b"] = json::array({1, 2.5});
  j["c"] = "x";
  j["d"] = nullptr;
  j["e"] = json::object();
  j["f"] = json::array({json{{"k", 1}}});
  j["g"] = 7;
  const std::string compact = dump17(j, -1);
  CHECK(compact == R"({"a":0.10000000000000001,"b":[1,2.5],"c":"x","d":null,"e":{},"f":[{"k":1}],"g":7})");
  const std::string pretty = dump17(j);
  CHECK(pretty.find("\"b\": [1, 2.5]") != std::string::npos);
  CHECK(json::parse(pretty) == json::parse(compact));
  CHECK(dump17(json::array()) == "[]");
}

TEST_CASE("residual kinds round trip through JSON") {
  for (const auto& nk : builtin_kinds()) {
    CAPTURE(nk.name);
    const json j = residual_kind_to_json(nk.kind);
    const ResidualKind back = residual_kind_from_json(j);
    CHECK(residual_kind_to_json(back) == j);
    CHECK(back.tag == nk.kind.tag);
  }
  const auto k = residual_kind_from_json(json::parse(R"({"kind":"gnpw","nu1":1,"nu2":0.5,"theta":[1,0,-2,1]})"));
  CHECK(k.gnpw.nu1 == 1.0);
  CHECK(k.gnpw.nu2 == 0.5);
  CHECK(k.gnpw.theta[2] == -2.0);
  const auto s = residual_kind_from_json(json::parse(R"({"kind":"stabilized_aipw","r":0.3,"m":4})"));
  CHECK(s.r_default == 0.3);
  CHECK(s.bound_m.value() == 4.0);
  const auto q = residual_kind_from_json(json::parse(R"({"kind":"cqr","quantile":0.25,"level":2})"));
  CHECK(q.quantile == 0.25);
  CHECK(q.cqr_level == 2);
}

TEST_CASE("residual kind JSON errors") {
  for (const char* bad : {
           R"({"kind":"gnpw","nu":1})",
           R"({"kind":"robinson","theta":[1,0]})",
           R"({"kind":"nope"})",
           R"({"nu1":1})",
           R"([1,2])",
           R"({"kind":"gnpw","theta":[1,0,-1]})",
           R"({"kind":"gnpw","theta":[1,1,0,0]})",
           R"({"kind":"gnpw","nu1":"1"})",
           R"({"kind":"cqr","level":1.5})",
           R"({"kind":"cac","levels":[0,-1],"kappa":[1,-1]})",
       }) {
    CAPTURE(bad);
    CHECK(expect::code_of([&] { residual_kind_from_json(json::parse(bad)); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("fpw JSON marks points") {
  FpwResult r;
  r.theta = {2.0, 2.0};
  r.per_w = {{3.0, 3.0}, {5.0, 5.0}};
  json j = fpw_to_json(r);
  CHECK(j.at("point") == 2.0);
  CHECK(j.at("per_w_intervals").size() == 2);
  r.theta = {-3.0, 7.0};
  j = fpw_to_json(r);
  CHECK_FALSE(j.contains("point"));
  CHECK(j.at("lo") == -3.0);
  CHECK(j.at("hi") == 7.0);
}

TEST_CASE("p-value CSV and confidence set JSON") {
  PValueBounds pv;
  pv.grid = {0.0, 0.5};
  pv.p_lo = {0.1, 0.2};
  pv.p_hi = {0.3, 1.0};
  pv.draws = 10;
  pv.models = 1;
  CHECK(pvalue_csv(pv) == "Tbar,p_lo,p_hi\n0,0.10000000000000001,0.29999999999999999\n0.5,0.20000000000000001,1\n");
  const json meta = pvalue_meta_to_json(pv);
  CHECK(meta.at("tie_rule") == "ge");
  CHECK(meta.at("grid_points") == 2);
  const json cs = confidence_set_to_json(confidence_set(pv, 0.05));
  CHECK(cs.at("values").size() == 2);
  CHECK(cs.at("contiguous") == true);
  CHECK(cs.at("resolution") == 0.5);
}

TEST_CASE("estimates CSV writes NA for failed replications") {
  EstimatorResult r;
  r.columns = {"1", "x"};
  r.estimates = {{1.5, -2.0}, {std::nan(""), std::nan("")}};
  CHECK(estimates_csv(r) == "rep,1,x\n0,1.5,-2\n1,NA,NA\n");
  DensitySummary d;
  d.grid = {0.0, 1.0};
  d.density = {0.25, 0.5};
  CHECK(density_csv(d) == "x,density\n0,0.25\n1,0.5\n");
}

TEST_CASE("check report JSON") {
  CheckReport r;
  r.rows.push_back({"k", "moment-zero", 1e-17, 1e-12, true, true, ""});
  r.rows.push_back({"k", "BDR", 1.0, 1e-12, false, false, "note"});
  json j = check_report_to_json(r);
  CHECK(j.at("all_as_expected") == true);
  CHECK(j.at("rows").size() == 2);
  CHECK(j.at("rows")[1].at("note") == "note");
  r.rows[1].expected_pass = true;
  CHECK(check_report_to_json(r).at("all_as_expected") == false);
}
