#include <cmath>

#include "spw/error.hpp"
#include "spw/sim.hpp"

namespace spw {

std::string dgp_tag_name(DgpTag tag) {
  switch (tag) {
    case DgpTag::LargeSampleAppendix: return "large";
    case DgpTag::FiniteSampleAppendix: return "finite";
    case DgpTag::Custom: return "custom";
  }
  return "unknown";
}

DgpTag parse_dgp_tag(const std::string& name) {
  if (name == "large") return DgpTag::LargeSampleAppendix;
  if (name == "finite") return DgpTag::FiniteSampleAppendix;
  if (name == "custom") return DgpTag::Custom;
  fail(ErrorCode::InvalidArgument, "unknown data-generating process '" + name +
                                       "' (expected large or finite)");
}

void DgpSpec::validate() const {
  switch (tag) {
    case DgpTag::LargeSampleAppendix:
      require(n >= 3, "large design needs n >= 3");
      break;
    case DgpTag::FiniteSampleAppendix:
      require(n % 5 == 0 && n >= 10, "finite design needs n a multiple of 5 and at least 10");
      require(lambda > 0.0 && lambda < 1.0, "finite design needs lambda in (0,1)");
      break;
    case DgpTag::Custom:
      require(static_cast<bool>(custom), "custom design needs a generator");
      require(n >= 1, "custom design needs n >= 1");
      break;
  }
}

Dataset gen_large_sample(const DgpSpec& spec, RngHandle& rng) {
  require(spec.tag == DgpTag::LargeSampleAppendix, "not a large-sample design");
  spec.validate();
  const std::size_t n = spec.n;
  std::vector<double> y(n), x(n), e(n);
  std::vector<int> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = rng.uniform01();
    const double ei = xi * xi * xi * xi;
    const int wi = rng.bernoulli(ei) ? 1 : 0;
    const double v1 = rng.uniform(-2.0, 2.0);
    const double v2 = rng.uniform(-2.0, 2.0);
    const double tau = 3.0 - 2.0 * xi;
    x[i] = xi;
    e[i] = ei;
    w[i] = wi;
    y[i] = 10.0 * (1.0 - ei) + ei * v1 + wi * (tau + 2.0 * v2);
  }
  Dataset d = make_large_dataset(std::move(y), std::move(w), std::move(x), {"x"}, 2);
  d.extra.emplace_back("e", std::move(e));
  return d;
}

AssignmentModel finite_design_model(double lambda) {
  require(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0,1)");
  return AssignmentModel::binary({lambda, 1.0 - lambda});
}

FsConfig finite_design_config() {
  FsConfig c;
  c.bounds = {{6.0, 14.0}, {13.0, 27.0}};
  c.kappa = {-1.0, 1.0};
  return c;
}

FiniteDraw gen_finite_sample_full(const DgpSpec& spec, RngHandle& rng) {
  require(spec.tag == DgpTag::FiniteSampleAppendix, "not a finite-sample design");
  spec.validate();
  const std::size_t n = spec.n;
  const std::size_t cut = n / 5 * 4;
  FiniteDraw out;
  out.po.y.resize(n);
  std::vector<double> y(n);
  std::vector<int> w(n);
  std::vector<std::int64_t> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int xi = i + 1 > cut ? 1 : 0;
    const double v1 = rng.uniform(-1.0, 1.0);
    const double v2 = rng.uniform(-1.0, 1.0);
    const double y0 = 10.0 + 2.0 * (1.0 + xi) * v1;
    const double y1 = y0 + 10.0 + (spec.homogeneous_effect ? 0.0 : (1.0 + 2.0 * xi) * v2);
    const double p = xi == 0 ? spec.lambda : 1.0 - spec.lambda;
    w[i] = rng.bernoulli(p) ? 1 : 0;
    x[i] = xi;
    out.po.y[i] = {y0, y1};
    y[i] = w[i] == 1 ? y1 : y0;
  }
  out.data = make_finite_dataset(std::move(y), std::move(w), std::move(x), 2);
  return out;
}

Dataset gen_finite_sample(const DgpSpec& spec, RngHandle& rng) {
  return gen_finite_sample_full(spec, rng).data;
}

}  // namespace spw
