#include <array>
#include <string>

#include "spw/error.hpp"
#include "spw/finite_sample.hpp"
#include "spw/parallel.hpp"

namespace spw {

std::vector<double> PotentialOutcomes::realize(const std::vector<int>& w) const {
  require(w.size() == y.size(), "assignment length differs from potential outcomes");
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto v = static_cast<std::size_t>(w[i]);
    require(v < y[i].size(), "assignment label has no potential outcome");
    out[i] = y[i][v];
  }
  return out;
}

namespace {

constexpr std::size_t kBlock = 4096;

// Sums of prob * f(assignment) for each of D components, blocked and
// combined pairwise so the total is independent of the thread count.
template <std::size_t D, typename Eval>
std::array<double, D + 1> enumerate(const PotentialOutcomes& po, const AssignmentModel& model,
                                    const StrataIndex& strata, unsigned threads,
                                    std::size_t& total, Eval&& eval) {
  const std::size_t n = strata.size();
  require(n >= 1, "enumeration needs at least one unit");
  require(po.y.size() == n, "potential outcomes differ in length from strata");
  const int L = model.levels();
  model.validate(L, strata.num_strata());
  for (const auto& row : po.y)
    require(row.size() == static_cast<std::size_t>(L),
            "each unit needs one potential outcome per treatment level");

  total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > kMaxEnumeration / static_cast<std::size_t>(L))
      fail(ErrorCode::EnumerationTooLarge,
           std::to_string(L) + "^" + std::to_string(n) + " assignments exceed the limit of 2^24");
    total *= static_cast<std::size_t>(L);
  }

  const std::size_t blocks = (total + kBlock - 1) / kBlock;
  std::vector<std::array<double, D + 1>> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    std::vector<int> w(n);
    std::vector<double> y(n);
    FsSample s;
    s.strata = &strata;
    s.levels = L;
    std::array<double, D + 1> acc{};
    const std::size_t end = std::min(total, (blk + 1) * kBlock);
    for (std::size_t a = blk * kBlock; a < end; ++a) {
      std::size_t rest = a;
      double p = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = static_cast<int>(rest % static_cast<std::size_t>(L));
        rest /= static_cast<std::size_t>(L);
        const auto k = static_cast<std::size_t>(strata.stratum_of[i]);
        p *= model.lambda[k][static_cast<std::size_t>(w[i])];
        y[i] = po.y[i][static_cast<std::size_t>(w[i])];
      }
      s.y = y;
      s.w = w;
      std::array<double, D> v = eval(s);
      acc[0] += p;
      for (std::size_t d = 0; d < D; ++d) acc[d + 1] += p * v[d];
    }
    partial[blk] = acc;
  });

  std::array<double, D + 1> out{};
  std::vector<double> col(blocks);
  for (std::size_t d = 0; d <= D; ++d) {
    for (std::size_t b = 0; b < blocks; ++b) col[b] = partial[b][d];
    out[d] = pairwise_sum(col.begin(), col.end());
  }
  return out;
}

}  // namespace

Expectation enumerate_expectation(const Statistic& stat, const PotentialOutcomes& po,
                                  const AssignmentModel& model, const StrataIndex& strata,
                                  unsigned threads) {
  require(static_cast<bool>(stat), "statistic is empty");
  Expectation e;
  auto sums = enumerate<1>(po, model, strata, threads, e.assignments,
                           [&](const FsSample& s) { return std::array<double, 1>{stat(s)}; });
  e.total_probability = sums[0];
  e.value = sums[1];
  return e;
}

SetExpectation enumerate_set_expectation(const SetStatistic& stat, const PotentialOutcomes& po,
                                         const AssignmentModel& model,
                                         const StrataIndex& strata, unsigned threads) {
  require(static_cast<bool>(stat), "statistic is empty");
  SetExpectation e;
  auto sums = enumerate<2>(po, model, strata, threads, e.assignments, [&](const FsSample& s) {
    SetEstimate v = stat(s);
    return std::array<double, 2>{v.lo, v.hi};
  });
  e.total_probability = sums[0];
  e.lo = sums[1];
  e.hi = sums[2];
  return e;
}

}  // namespace spw
