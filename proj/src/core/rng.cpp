#include "spw/rng.hpp"

#include "spw/error.hpp"

namespace spw {

namespace {
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}
}  // namespace

RngHandle::RngHandle(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

double RngHandle::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngHandle::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

bool RngHandle::bernoulli(double p) { return uniform01() < p; }

std::uint64_t RngHandle::below(std::uint64_t n) {
  require(n > 0, "below(n) needs n > 0");
  // rejection sampling keeps the result exactly uniform
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    std::uint64_t v = engine_();
    if (v < limit) return v % n;
  }
}

}  // namespace spw
