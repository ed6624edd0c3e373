#include <doctest.h>

#include <cmath>

#include "../oracles/oracles.hpp"
#include "../support/expect.hpp"
#include "../support/gen.hpp"
#include "spw/finite_sample.hpp"

using namespace spw;

namespace {

StrataIndex strata_of_sizes(const std::vector<int>& sizes) {
  std::vector<int> ids;
  for (std::size_t k = 0; k < sizes.size(); ++k)
    for (int j = 0; j < sizes[k]; ++j) ids.push_back(static_cast<int>(k));
  return build_strata(ids, sizes.size());
}

PotentialOutcomes constant(std::size_t n, std::vector<double> mu) {
  return {std::vector<std::vector<double>>(n, mu)};
}

// Unit-level outcomes scattered around mu[w], recentred so every stratum
// averages exactly mu[w].
PotentialOutcomes scattered(gen::Gen& g, const StrataIndex& st, const std::vector<double>& mu,
                            double spread) {
  PotentialOutcomes po;
  po.y.assign(st.size(), std::vector<double>(mu.size()));
  for (std::size_t k = 0; k < st.num_strata(); ++k)
    for (std::size_t w = 0; w < mu.size(); ++w) {
      double mean = 0.0;
      for (std::size_t i : st.members[k]) {
        po.y[i][w] = g.uniform(-spread, spread);
        mean += po.y[i][w];
      }
      mean /= static_cast<double>(st.members[k].size());
      for (std::size_t i : st.members[k]) po.y[i][w] += mu[w] - mean;
    }
  return po;
}

}  // namespace

TEST_CASE("total probability is one") {
  for (int rep = 0; rep < 50; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep));
    const auto st = strata_of_sizes(g.sizes(g.integer(1, 3), 2, 4));
    const int L = g.integer(2, 3);
    AssignmentModel m;
    for (std::size_t k = 0; k < st.num_strata(); ++k) {
      std::vector<double> lam;
      double tot = 0.0;
      for (int w = 0; w < L; ++w) tot += lam.emplace_back(g.uniform(0.05, 1.0));
      for (double& v : lam) v /= tot;
      m.lambda.push_back(lam);
    }
    // renormalize so each row sums to 1 within rounding
    for (auto& lam : m.lambda) {
      double s = 0.0;
      for (std::size_t w = 0; w + 1 < lam.size(); ++w) s += lam[w];
      lam.back() = 1.0 - s;
    }
    const auto e = enumerate_expectation([](const FsSample&) { return 1.0; },
                                         constant(st.size(), std::vector<double>(static_cast<std::size_t>(L), 0.0)), m, st);
    CHECK(std::fabs(e.total_probability - 1.0) <= 1e-12);
    CHECK(std::fabs(e.value - 1.0) <= 1e-12);
    CHECK(static_cast<double>(e.assignments) == std::pow(L, static_cast<double>(st.size())));
  }
}

TEST_CASE("probability that a stratum has no treated unit") {
  const auto st = strata_of_sizes({4, 3});
  const auto m = AssignmentModel::binary({0.3, 0.6});
  const auto e = enumerate_expectation(
      [](const FsSample& s) {
        for (std::size_t i : s.strata->members[1])
          if (s.w[i] == 1) return 0.0;
        return 1.0;
      },
      constant(7, {0, 0}), m, st);
  CHECK(std::fabs(e.value - std::pow(0.4, 3)) <= 1e-12);
}

TEST_CASE("shrinkage mean bias law") {
  for (int N = 2; N <= 10; ++N)
    for (double lam : {0.05, 0.1, 0.3, 0.5, 0.9}) {
      const auto st = strata_of_sizes({N});
      const double mu = 2.5;
      const auto e = enumerate_expectation([](const FsSample& s) { return shrinkage_mean(s, 1, 0); },
                                           constant(st.size(), {0.0, mu}), AssignmentModel::binary({lam}), st);
      CHECK(std::fabs(e.value - mu * (1.0 - std::pow(1.0 - lam, N))) <= 1e-12);
    }
  const auto st = strata_of_sizes({2});
  const auto e = enumerate_expectation([](const FsSample& s) { return shrinkage_mean(s, 1, 0); },
                                       constant(2, {1.0, 1.0}), AssignmentModel::binary({0.5}), st);
  CHECK(std::fabs(e.value - 0.75) <= 1e-12);
}

TEST_CASE("scaled ATE example and unbiasedness") {
  {
    const auto st = strata_of_sizes({3});
    const auto e = enumerate_expectation([](const FsSample& s) { return scaled_ate(s, 1, 0); },
                                         constant(3, {1.0, 4.0}), AssignmentModel::binary({0.3}), st);
    CHECK(std::fabs(e.value - 0.63) <= 1e-12);
  }
  for (int rep = 0; rep < 40; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep) + 11);
    const auto st = strata_of_sizes(g.sizes(g.integer(1, 3), 2, 3));
    std::vector<double> lam;
    for (std::size_t k = 0; k < st.num_strata(); ++k) lam.push_back(g.uniform(0.05, 0.95));
    const auto m = AssignmentModel::binary(lam);
    PotentialOutcomes po;
    for (std::size_t i = 0; i < st.size(); ++i) po.y.push_back({g.uniform(-3, 3), g.uniform(-3, 3)});
    const auto e = enumerate_expectation([](const FsSample& s) { return scaled_ate(s, 1, 0); }, po, m, st);
    // per-unit version of G (mu_1 - mu_0); equals it when outcomes are stratum-homogeneous
    double target = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) {
      const double l = lam[static_cast<std::size_t>(st.stratum_of[i])];
      target += l * (1.0 - l) * (po.y[i][1] - po.y[i][0]);
    }
    target /= static_cast<double>(st.size());
    CHECK(std::fabs(e.value - target) <= 1e-12);
    const auto h = enumerate_expectation([](const FsSample& s) { return scaled_ate(s, 1, 0); },
                                         constant(st.size(), {1.5, -0.5}), m, st);
    CHECK(std::fabs(h.value - scaled_ate_factor(m, st, 1, 0) * (-2.0)) <= 1e-12);
  }
}

TEST_CASE("unpooled set is unbiased") {
  for (double lam : {0.1, 0.4, 0.8})
    for (int N : {2, 3, 5}) {
      const auto st = strata_of_sizes({N});
      gen::Gen g(static_cast<std::uint64_t>(N));
      const auto po = scattered(g, st, {0.0, 3.0}, 2.0);
      const auto e = enumerate_set_expectation(
          [](const FsSample& s) { return unpooled_set(s, 1, 0, {0.0, 10.0}); }, po,
          AssignmentModel::binary({lam}), st);
      CHECK(e.lo <= 3.0 + 1e-12);
      CHECK(e.hi >= 3.0 - 1e-12);
    }
}

TEST_CASE("fpw is an unbiased set estimator") {
  const std::vector<std::vector<int>> shapes = {{3, 3}, {2, 2}, {4, 2}, {3}, {2, 3, 2}};
  int cases = 0;
  for (const auto& shape : shapes)
    for (double l0 : {0.1, 0.5})
      for (double l1 : {0.1, 0.5, 0.9}) {
        const auto st = strata_of_sizes(shape);
        std::vector<double> lam(st.num_strata(), l0);
        lam.back() = l1;
        gen::Gen g(static_cast<std::uint64_t>(cases));
        const std::vector<double> mu = {1.0, 4.0};
        const auto po = scattered(g, st, mu, 1.5);
        FsConfig cfg;
        cfg.bounds = {{-2.0, 5.0}, {0.0, 9.0}};
        cfg.kappa = {-1.0, 1.0};
        const auto e = enumerate_set_expectation(
            [&](const FsSample& s) { return fpw_set(s, cfg).theta; }, po, AssignmentModel::binary(lam), st);
        CHECK(e.lo - 3.0 <= 1e-12);
        CHECK(3.0 - e.hi <= 1e-12);
        ++cases;
      }
  CHECK(cases == 30);
}

TEST_CASE("ipw baseline is biased in small strata") {
  const auto st = strata_of_sizes({3});
  const auto e = enumerate_expectation([](const FsSample& s) { return ipw_fs_estimate(s, {0, 1}); },
                                       constant(3, {0.0, 1.0}), AssignmentModel::binary({0.2}), st);
  CHECK(std::fabs(e.value - 1.0) > 1e-3);
}

TEST_CASE("enumeration matches the recursive oracle") {
  for (int rep = 0; rep < 60; ++rep) {
    gen::Gen g(static_cast<std::uint64_t>(rep) + 300);
    const auto sizes = g.sizes(g.integer(1, 3), 2, 3);
    const auto st = strata_of_sizes(sizes);
    std::vector<double> lam;
    for (std::size_t k = 0; k < st.num_strata(); ++k) lam.push_back(g.uniform(0.05, 0.95));
    PotentialOutcomes po;
    for (std::size_t i = 0; i < st.size(); ++i) po.y.push_back({g.uniform(-3, 3), g.uniform(-3, 3)});
    const std::vector<double> kappa = {g.uniform(-1, 1), g.uniform(-1, 1)};

    const auto e = enumerate_expectation([&](const FsSample& s) { return wmd_estimate(s, kappa); }, po,
                                         AssignmentModel::binary(lam), st);
    oracle::IVec ids(st.stratum_of.begin(), st.stratum_of.end());
    const auto o = oracle::expectation(oracle::unit_probs(ids, lam), [&](const oracle::IVec& w) {
      oracle::Sample s;
      s.w = w;
      s.stratum = ids;
      s.strata = static_cast<int>(st.num_strata());
      for (std::size_t i = 0; i < w.size(); ++i) s.y.push_back(po.y[i][static_cast<std::size_t>(w[i])]);
      return oracle::wmd(s, kappa);
    });
    CHECK(e.value == doctest::Approx(o.value).epsilon(1e-12).scale(1.0));
    CHECK(e.total_probability == doctest::Approx(o.total).epsilon(1e-12));
  }
}

TEST_CASE("enumeration result does not depend on thread count") {
  const auto st = strata_of_sizes({5, 4, 5});
  gen::Gen g(4);
  const auto po = scattered(g, st, {0.5, 2.0}, 1.0);
  const auto m = AssignmentModel::binary({0.2, 0.5, 0.7});
  auto stat = [](const FsSample& s) { return scaled_ate(s, 1, 0); };
  const auto a = enumerate_expectation(stat, po, m, st, 1);
  const auto b = enumerate_expectation(stat, po, m, st, 4);
  CHECK(a.value == b.value);
  CHECK(a.total_probability == b.total_probability);
}

TEST_CASE("enumeration guard and validation") {
  const auto big = strata_of_sizes({25});
  CHECK(expect::code_of([&] {
          enumerate_expectation([](const FsSample&) { return 0.0; }, constant(25, {0, 0}),
                                AssignmentModel::binary({0.5}), big);
        }) == ErrorCode::EnumerationTooLarge);
  std::vector<int> ids(16, 0);
  const auto tri = build_strata(ids, 1);
  AssignmentModel m3{{{0.2, 0.3, 0.5}}};
  CHECK(expect::code_of([&] {
          enumerate_expectation([](const FsSample&) { return 0.0; }, constant(16, {0, 0, 0}), m3, tri);
        }) == ErrorCode::EnumerationTooLarge);
  const auto st = strata_of_sizes({2});
  CHECK(expect::code_of([&] {
          enumerate_expectation([](const FsSample&) { return 0.0; }, constant(3, {0, 0}),
                                AssignmentModel::binary({0.5}), st);
        }) == ErrorCode::InvalidArgument);
  CHECK(expect::code_of([&] {
          enumerate_expectation(nullptr, constant(2, {0, 0}), AssignmentModel::binary({0.5}), st);
        }) == ErrorCode::InvalidArgument);
}
