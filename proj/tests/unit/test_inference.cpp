#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "../support/expect.hpp"
#include "../support/gen.hpp"
#include "spw/inference.hpp"
#include "spw/rng.hpp"

using namespace spw;

namespace {

struct Fixture {
  Dataset data;
  StrataIndex strata;
  FsSample s;
  explicit Fixture(Dataset d) : data(std::move(d)), strata(build_strata(data)), s(make_sample(data, strata)) {}
  Fixture(const Fixture&) = delete;
};

std::vector<double> observed_shares(const Fixture& f) {
  std::vector<double> out;
  for (std::size_t k = 0; k < f.strata.num_strata(); ++k) {
    double t = 0.0;
    for (std::size_t i : f.strata.members[k]) t += f.data.w[i];
    const double N = static_cast<double>(f.strata.counts[k]);
    out.push_back(std::clamp(t / N, 0.5 / N, 1.0 - 0.5 / N));
  }
  return out;
}

// count of draws exceeding the observed value, per (eps3, eps4) choice
std::pair<std::size_t, std::size_t> count_range(const std::vector<OmegaDraw>& draws, double tbar,
                                                double c1, double obs) {
  std::size_t lo = draws.size() + 1, hi = 0;
  for (double e3 : {-c1, c1})
    for (double e4 : {-c1, c1}) {
      std::size_t c = 0;
      for (const auto& d : draws) c += d.o1 + d.o2 * tbar + e3 * d.o3 + e4 * d.o4 >= obs ? 1 : 0;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  return {lo, hi};
}

}  // namespace

TEST_CASE("statistic weights reproduce the point statistics") {
  for (int rep = 0; rep < 200; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep));
    Fixture f(g.finite(g.sizes(g.integer(1, 5), 2, 8), 2, g.uniform(0.1, 0.9)));
    const std::vector<int> w = f.data.w;
    CHECK(apply_weights(statistic_weights(LinearStatistic::ScaledAte, f.strata, w), f.data.y) ==
          doctest::Approx(scaled_ate(f.s, 1, 0)).epsilon(1e-12).scale(1.0));
    CHECK(apply_weights(statistic_weights(LinearStatistic::Wmd, f.strata, w), f.data.y) ==
          doctest::Approx(wmd_estimate(f.s, {-1, 1})).epsilon(1e-12).scale(1.0));
    CHECK(apply_weights(statistic_weights(LinearStatistic::IpwFs, f.strata, w), f.data.y) ==
          doctest::Approx(ipw_fs_estimate(f.s, {-1, 1})).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("statistic names") {
  CHECK(parse_linear_statistic("scaled_ate") == LinearStatistic::ScaledAte);
  CHECK(parse_linear_statistic("wmd") == LinearStatistic::Wmd);
  CHECK(parse_linear_statistic("ipw_fs") == LinearStatistic::IpwFs);
  for (auto s : {LinearStatistic::ScaledAte, LinearStatistic::Wmd, LinearStatistic::IpwFs})
    CHECK(parse_linear_statistic(linear_statistic_name(s)) == s);
  CHECK(expect::code_of([] { parse_linear_statistic("fpw"); }) == ErrorCode::StatisticNotLinear);
  CHECK(expect::code_of([] { parse_linear_statistic("median"); }) == ErrorCode::StatisticNotLinear);
}

TEST_CASE("omega draws on two units match hand evaluation") {
  Fixture f(make_finite_dataset({5, 3}, {1, 0}, {1, 1}));
  const auto draws = draw_omegas(f.s, AssignmentModel::binary({0.5}), LinearStatistic::ScaledAte, 400, 3);
  // (1,0): q=(1,-1) -> O1=1, U=0; (0,1): q=(-1,1) -> O1=-1, U=(1/2,1/2); equal arms: q=0
  int fixed = 0, swapped = 0, flat = 0;
  for (const auto& d : draws) {
    if (d.o1 == 1.0 && d.o2 == 0.0 && d.o3 == 0.0 && d.o4 == 0.0)
      ++fixed;
    else if (d.o1 == -1.0 && d.o2 == 1.0 && d.o3 == 1.0 && d.o4 == 0.0)
      ++swapped;
    else if (d.o1 == 0.0 && d.o2 == 0.0 && d.o3 == 0.0 && d.o4 == 0.0)
      ++flat;
  }
  CHECK(fixed + swapped + flat == 400);
  CHECK(fixed > 50);
  CHECK(swapped > 50);
  CHECK(flat > 100);
}

TEST_CASE("omega positive and negative parts add up") {
  for (int rep = 0; rep < 50; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep) + 60);
    Fixture f(g.finite(g.sizes(g.integer(1, 4), 2, 9), 2));
    const auto m = AssignmentModel::binary(observed_shares(f));
    for (auto stat : {LinearStatistic::ScaledAte, LinearStatistic::Wmd, LinearStatistic::IpwFs})
      for (const auto& d : draw_omegas(f.s, m, stat, 50, static_cast<std::uint64_t>(rep))) {
        CHECK(d.o3 >= 0.0);
        CHECK(d.o4 <= 0.0);
        CHECK(std::fabs(d.o3 + d.o4 - d.o2) <= 1e-12);
      }
  }
}

TEST_CASE("omega draws are reproducible and thread independent") {
  gen::Gen g(2);
  Fixture f(g.finite({6, 6, 8}));
  const auto m = AssignmentModel::binary({0.3, 0.5, 0.6});
  const auto a = draw_omegas(f.s, m, LinearStatistic::ScaledAte, 300, 99, 0, 1);
  const auto b = draw_omegas(f.s, m, LinearStatistic::ScaledAte, 300, 99, 0, 4);
  const auto c = draw_omegas(f.s, m, LinearStatistic::ScaledAte, 300, 100, 0, 1);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].o1 == b[i].o1 && a[i].o2 == b[i].o2 && a[i].o3 == b[i].o3 && a[i].o4 == b[i].o4;
    differ = differ || a[i].o1 != c[i].o1;
  }
  CHECK(same);
  CHECK(differ);
  CHECK(expect::code_of([&] { draw_omegas(f.s, m, LinearStatistic::ScaledAte, 0, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("binary treatment is required") {
  Fixture f(make_finite_dataset({1, 2, 3, 4}, {0, 1, 2, 0}, {1, 1, 1, 1}));
  AssignmentModel m{{{0.3, 0.3, 0.4}}};
  CHECK(expect::code_of([&] { draw_omegas(f.s, m, LinearStatistic::ScaledAte, 5, 1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("null grid parsing") {
  CHECK(NullGrid::parse("0:1:0.25").values == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(NullGrid::parse("3,1,2,2").values == std::vector<double>{1, 2, 3});
  CHECK(NullGrid::parse("-5:15:0.1").values.size() == 201);
  CHECK(NullGrid::parse("2").values == std::vector<double>{2});
  for (const char* bad : {"1:0:0.1", "0:1:0", "0:1:-1", "a,b", "0:1", "0:1e7:1e-3", "1,,2", "nan", ""})
    CHECK(expect::code_of([&] { NullGrid::parse(bad); }) == ErrorCode::InvalidArgument);
  CHECK(expect::code_of([] { NullGrid::from_values({}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tie policy") {
  const auto p = randomized_tiebreak_policy();
  CHECK(p.name == "ge");
  CHECK(p.exceeds(1.0, 1.0));
  CHECK(p.exceeds(2.0, 1.0));
  CHECK_FALSE(p.exceeds(0.5, 1.0));
  CHECK(expect::code_of([] { randomized_tiebreak_policy("random"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("p-values at the extremes of the tie rule") {
  // Y = 0 and Tbar = 0: every draw equals the observed 0
  Fixture z(make_finite_dataset({0, 0, 0, 0}, {1, 0, 1, 0}, {1, 1, 2, 2}));
  const auto m = AssignmentModel::binary({0.5, 0.5});
  const auto r = pvalue_bounds(z.s, LinearStatistic::ScaledAte, NullGrid::from_values({0.0}), {m}, 0.0, 100, 1);
  CHECK(r.p_lo[0] == 1.0);
  CHECK(r.p_hi[0] == 1.0);
  // a single stratum of two: draws take O1 + O2 Tbar in {1, -1 + Tbar, 0} against observed 1
  Fixture f(make_finite_dataset({5, 3}, {1, 0}, {1, 1}));
  const auto q = pvalue_bounds(f.s, LinearStatistic::ScaledAte, NullGrid::from_values({-10.0, 1.5, 2.0, 10.0}),
                               {AssignmentModel::binary({0.5})}, 0.0, 400, 5);
  const auto draws = draw_omegas(f.s, AssignmentModel::binary({0.5}), LinearStatistic::ScaledAte, 400, 5);
  const auto fixed = std::count_if(draws.begin(), draws.end(), [](const OmegaDraw& d) { return d.o1 == 1.0; });
  const auto swapped = std::count_if(draws.begin(), draws.end(), [](const OmegaDraw& d) { return d.o2 == 1.0; });
  CHECK(q.observed == 1.0);
  CHECK(q.p_hi[0] == static_cast<double>(fixed) / 400.0);
  CHECK(q.p_hi[1] == static_cast<double>(fixed) / 400.0);
  CHECK(q.p_hi[2] == static_cast<double>(fixed + swapped) / 400.0);  // tie at Tbar = 2
  CHECK(q.p_hi[3] == static_cast<double>(fixed + swapped) / 400.0);
}

TEST_CASE("pvalue bounds agree with a direct count over the draws") {
  for (int rep = 0; rep < 30; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep) + 7);
    Fixture f(g.finite(g.sizes(g.integer(1, 3), 3, 8)));
    const auto m = AssignmentModel::binary(observed_shares(f));
    const double c1 = g.coin() ? 0.0 : g.uniform(0.0, 2.0);
    const auto grid = NullGrid::parse("-6:6:0.5");
    for (auto stat : {LinearStatistic::ScaledAte, LinearStatistic::Wmd, LinearStatistic::IpwFs}) {
      const auto r = pvalue_bounds(f.s, stat, grid, {m}, c1, 150, 11);
      const auto draws = draw_omegas(f.s, m, stat, 150, 11);
      for (std::size_t gi = 0; gi < grid.values.size(); ++gi) {
        const auto [lo, hi] = count_range(draws, grid.values[gi], c1, r.observed);
        CHECK(r.p_lo[gi] == static_cast<double>(lo) / 150.0);
        CHECK(r.p_hi[gi] == static_cast<double>(hi) / 150.0);
        CHECK(r.p_lo[gi] <= r.p_hi[gi]);
        CHECK(r.p_lo[gi] >= 0.0);
        CHECK(r.p_hi[gi] <= 1.0);
        if (c1 == 0.0) CHECK(r.p_lo[gi] == r.p_hi[gi]);
      }
    }
  }
}

TEST_CASE("bounds over several models are the envelope of single-model bounds") {
  gen::Gen g(17);
  Fixture f(g.finite({6, 8}));
  std::vector<AssignmentModel> ms = {AssignmentModel::binary({0.2, 0.5}), AssignmentModel::binary({0.6, 0.4})};
  const auto grid = NullGrid::parse("-4:4:1");
  const auto both = pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, ms, 0.3, 200, 4);
  for (std::size_t gi = 0; gi < grid.values.size(); ++gi) {
    double lo = 2.0, hi = -1.0;
    for (std::size_t l = 0; l < ms.size(); ++l) {
      const auto [c_lo, c_hi] = count_range(draw_omegas(f.s, ms[l], LinearStatistic::ScaledAte, 200, 4, l),
                                            grid.values[gi], 0.3, both.observed);
      lo = std::min(lo, static_cast<double>(c_lo) / 200.0);
      hi = std::max(hi, static_cast<double>(c_hi) / 200.0);
    }
    CHECK(both.p_lo[gi] == lo);
    CHECK(both.p_hi[gi] == hi);
  }
}

TEST_CASE("one extra draw moves each bound by at most 1/B") {
  for (int rep = 0; rep < 20; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep) + 70);
    Fixture f(g.finite(g.sizes(2, 3, 7)));
    const auto m = AssignmentModel::binary(observed_shares(f));
    const auto grid = NullGrid::parse("-5:5:0.25");
    const std::size_t B = 120;
    const auto a = pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, {m}, 0.5, B, 8);
    const auto b = pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, {m}, 0.5, B + 1, 8);
    for (std::size_t gi = 0; gi < grid.values.size(); ++gi) {
      const double lo_a = a.p_lo[gi] * static_cast<double>(B), lo_b = b.p_lo[gi] * static_cast<double>(B + 1);
      const double hi_a = a.p_hi[gi] * static_cast<double>(B), hi_b = b.p_hi[gi] * static_cast<double>(B + 1);
      CHECK(std::round(lo_b - lo_a) >= 0.0);
      CHECK(std::round(lo_b - lo_a) <= 1.0);
      CHECK(std::round(hi_b - hi_a) >= 0.0);
      CHECK(std::round(hi_b - hi_a) <= 1.0);
    }
  }
}

TEST_CASE("p-value bounds are constant between breakpoints") {
  gen::Gen g(23);
  Fixture f(g.finite({5, 7, 6}));
  const auto m = AssignmentModel::binary(observed_shares(f));
  const std::size_t B = 60;
  const double c1 = 0.4;
  const auto draws = draw_omegas(f.s, m, LinearStatistic::ScaledAte, B, 2);
  const double obs = scaled_ate(f.s, 1, 0);
  std::set<double> cuts;
  for (const auto& d : draws)
    for (double e3 : {-c1, c1})
      for (double e4 : {-c1, c1})
        if (d.o2 != 0.0) cuts.insert((obs - d.o1 - e3 * d.o3 - e4 * d.o4) / d.o2);
  CHECK(cuts.size() <= 4 * B);
  std::vector<double> pts;
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const double a = *it, b = *std::next(it);
    if (b - a < 1e-6) continue;
    pts.push_back(a + (b - a) / 3.0);
    pts.push_back(a + 2.0 * (b - a) / 3.0);
  }
  const auto r = pvalue_bounds(f.s, LinearStatistic::ScaledAte, NullGrid::from_values(pts), {m}, c1, B, 2);
  for (std::size_t gi = 0; gi + 1 < r.grid.size(); gi += 2) {
    CHECK(r.p_lo[gi] == r.p_lo[gi + 1]);
    CHECK(r.p_hi[gi] == r.p_hi[gi + 1]);
  }
}

TEST_CASE("pvalue bounds are seed deterministic") {
  gen::Gen g(5);
  Fixture f(g.finite({5, 5, 6}));
  const auto mg = model_grid({{7, 0.2, 0.6}}, f.strata, f.data.w, 3);
  const auto grid = NullGrid::parse("-3:3:0.5");
  const auto a = pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, mg.models, 0.2, 100, 42, 1);
  const auto b = pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, mg.models, 0.2, 100, 42, 3);
  CHECK(a.p_lo == b.p_lo);
  CHECK(a.p_hi == b.p_hi);
  CHECK(a.observed == b.observed);
  CHECK(a.models == 3);
}

TEST_CASE("pvalue bounds argument validation") {
  gen::Gen g(5);
  Fixture f(g.finite({4, 4}));
  const auto m = AssignmentModel::binary({0.5, 0.5});
  const auto grid = NullGrid::parse("0,1");
  CHECK(expect::code_of([&] { pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, {}, 0.0, 10, 1); }) ==
        ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] { pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, {m}, -1.0, 10, 1); }) ==
        ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] { pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, {m}, 0.0, 0, 1); }) ==
        ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] {
          pvalue_bounds(f.s, LinearStatistic::ScaledAte, grid, {AssignmentModel::binary({0.5})}, 0.0, 10, 1);
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("confidence set inversion") {
  PValueBounds pv;
  pv.grid = {0, 1, 2, 3, 4, 5};
  pv.p_lo = {0, 0, 0, 0, 0, 0};
  pv.p_hi = {0.01, 0.2, 0.6, 0.3, 0.04, 0.07};
  const auto a = confidence_set(pv, 0.05);
  CHECK(a.values == std::vector<double>{1, 2, 3, 5});
  CHECK_FALSE(a.contiguous);
  CHECK(a.resolution == 1.0);
  const auto b = confidence_set(pv, 0.5);
  CHECK(b.values == std::vector<double>{2});
  CHECK(b.contiguous);
  for (double v : b.values) CHECK(std::find(a.values.begin(), a.values.end(), v) != a.values.end());
  pv.p_hi.assign(6, 1.0);
  CHECK(confidence_set(pv, 0.05).values == pv.grid);
  // strict inequality at alpha
  pv.p_hi = {0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
  CHECK(confidence_set(pv, 0.05).values.empty());
  CHECK(expect::code_of([&] { confidence_set(pv, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] { confidence_set(pv, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("confidence sets are nested in alpha") {
  for (int rep = 0; rep < 20; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep) + 200);
    Fixture f(g.finite(g.sizes(2, 4, 8)));
    const auto m = AssignmentModel::binary(observed_shares(f));
    const auto r = pvalue_bounds(f.s, LinearStatistic::ScaledAte, NullGrid::parse("-8:8:0.25"), {m}, 0.0, 200, 3);
    const auto wide = confidence_set(r, 0.05);
    const auto narrow = confidence_set(r, 0.5);
    CHECK(std::includes(wide.values.begin(), wide.values.end(), narrow.values.begin(), narrow.values.end()));
  }
}

TEST_CASE("well separated data give a contiguous set") {
  // two strata of 20, effect 3, low noise; the ">=" event makes the set one-sided
  std::vector<int> ids(40, 0);
  for (std::size_t i = 20; i < 40; ++i) ids[i] = 1;
  const auto st = build_strata(ids, 2);
  const auto m = AssignmentModel::binary({0.5, 0.5});
  RngHandle rng(5, 0);
  const auto w = draw_assignment(m, st, rng);
  std::vector<double> y;
  std::vector<std::int64_t> x;
  std::mt19937_64 eng(1);
  std::normal_distribution<double> nd(0.0, 0.3);
  for (int i = 0; i < 40; ++i) {
    x.push_back(i < 20 ? 1 : 2);
    y.push_back(1.0 + 3.0 * w[static_cast<std::size_t>(i)] + nd(eng));
  }
  Fixture f(make_finite_dataset(y, w, x));
  const auto r = pvalue_bounds(f.s, LinearStatistic::ScaledAte, NullGrid::parse("-2:8:0.1"), {m}, 0.0, 1000, 13);
  const auto cs = confidence_set(r, 0.05);
  CHECK(cs.contiguous);
  REQUIRE_FALSE(cs.values.empty());
  CHECK(cs.values.front() <= 3.0);
  CHECK(cs.values.front() > -2.0);
  CHECK(cs.values.back() == r.grid.back());
  CHECK(r.p_hi.front() == 0.0);
}

TEST_CASE("lambda box parsing") {
  const auto a = parse_lambda_box("k=3:0.1,0.2");
  CHECK(a.label == 3);
  CHECK(a.lo == 0.1);
  CHECK(a.hi == 0.2);
  const auto b = parse_lambda_box("k=-4:0.4");
  CHECK(b.label == -4);
  CHECK(b.lo == 0.4);
  CHECK(b.hi == 0.4);
  for (const char* bad : {"3:0.1,0.2", "k=3", "k=3:0,0.5", "k=3:0.5,1", "k=3:0.6,0.5", "k=1.5:0.2", "k=x:0.2"})
    CHECK(expect::code_of([&] { parse_lambda_box(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model grid") {
  Dataset d = make_finite_dataset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {1, 1, 1, 1, 0, 1, 0, 0, 1, 0},
                                  {10, 10, 10, 10, 20, 20, 20, 30, 30, 30});
  const auto st = build_strata(d);
  const auto g = model_grid({{10, 0.1, 0.5}, {20, 0.3, 0.3}}, st, d.w, 5);
  CHECK(g.models.size() == 5);
  CHECK(g.plug_in_strata == std::vector<std::int64_t>{30});
  std::vector<double> first;
  for (const auto& m : g.models) {
    first.push_back(m.lambda[0][1]);
    CHECK(m.lambda[1][1] == 0.3);
    CHECK(m.lambda[2][1] == doctest::Approx(1.0 / 3.0));
    CHECK_NOTHROW(m.validate(2, 3));
  }
  std::sort(first.begin(), first.end());
  REQUIRE(first.size() == 5);
  for (std::size_t r = 0; r < 5; ++r) CHECK(first[r] == doctest::Approx(0.1 + 0.1 * static_cast<double>(r)));
  // plug-in share is clamped away from 0 and 1
  const auto p = model_grid({}, st, d.w, 5);
  CHECK(p.models.size() == 1);
  CHECK(p.models[0].lambda[0][1] == 1.0 - 1.0 / 8.0);
  const auto two = model_grid({{10, 0.1, 0.5}, {30, 0.2, 0.4}}, st, d.w, 4);
  CHECK(two.models.size() == 16);

  CHECK(expect::code_of([&] { model_grid({{99, 0.1, 0.5}}, st, d.w); }) == ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] { model_grid({{10, 0.1, 0.5}, {10, 0.2, 0.3}}, st, d.w); }) == ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] { model_grid({{10, 0.1, 0.5}}, st, d.w, 1); }) == ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] { model_grid({{10, 0.1, 0.5}, {20, 0.1, 0.5}, {30, 0.1, 0.5}}, st, d.w, 22); }) ==
        ErrorCode::ModelClassTooLarge);
  CHECK_NOTHROW(model_grid({{10, 0.1, 0.5}, {20, 0.1, 0.5}, {30, 0.1, 0.5}}, st, d.w, 21));
}

TEST_CASE("p-value at the true effect is super-uniform") {
  // homogeneous effect, c1 = 0, true model
  const std::size_t R = 300, B = 300;
  const double alpha = 0.1;
  std::vector<int> ids;
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 5; ++j) ids.push_back(k);
  const auto st = build_strata(ids, 6);
  const auto m = AssignmentModel::binary({0.3, 0.3, 0.5, 0.5, 0.7, 0.7});
  gen::Gen g(1);
  std::vector<double> y0;
  for (std::size_t i = 0; i < ids.size(); ++i) y0.push_back(g.uniform(-2, 2));
  std::size_t rejected = 0;
  for (std::size_t r = 0; r < R; ++r) {
    RngHandle rng(77, r);
    const auto w = draw_assignment(m, st, rng);
    std::vector<double> y(ids.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = y0[i] + 1.5 * w[i];
    FsSample s;
    s.y = y;
    s.w = w;
    s.strata = &st;
    const auto pv = pvalue_bounds(s, LinearStatistic::ScaledAte, NullGrid::from_values({1.5}), {m}, 0.0, B,
                                  1000 + r);
    rejected += pv.p_hi[0] <= alpha ? 1 : 0;
  }
  const double rate = static_cast<double>(rejected) / static_cast<double>(R);
  CHECK(rate <= alpha + 2.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(R)));
}
