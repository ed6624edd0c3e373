#include <charconv>
#include <cmath>

#include "spw/error.hpp"
#include "spw/gpw.hpp"

namespace spw {

namespace {
std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(strip(cur));
  return out;
}
}  // namespace

BasisSpec BasisSpec::parse(const std::string& spec) {
  BasisSpec b;
  for (const auto& term : split(spec, ',')) {
    require(!term.empty(), "empty term in basis '" + spec + "'");
    std::vector<Factor> factors;
    if (term != "1") {
      for (const auto& f : split(term, '*')) {
        require(!f.empty(), "empty factor in basis term '" + term + "'");
        Factor fac;
        auto caret = f.find('^');
        fac.column = strip(f.substr(0, caret));
        if (caret != std::string::npos) {
          std::string p = strip(f.substr(caret + 1));
          auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), fac.power);
          require(ec == std::errc() && ptr == p.data() + p.size() && fac.power >= 1,
                  "bad exponent in basis term '" + term + "'");
        }
        require(!fac.column.empty(), "missing column name in basis term '" + term + "'");
        factors.push_back(fac);
      }
    }
    b.names_.push_back(term);
    b.terms_.push_back(std::move(factors));
  }
  return b;
}

BasisSpec BasisSpec::intercept() { return parse("1"); }

BasisSpec BasisSpec::from_function(std::vector<std::string> names, RowFn fn) {
  require(!names.empty(), "basis needs at least one term");
  BasisSpec b;
  b.names_ = std::move(names);
  b.fn_ = std::move(fn);
  return b;
}

Eigen::MatrixXd BasisSpec::evaluate(const Dataset& data) const {
  const std::size_t n = data.size();
  const std::size_t d = dim();
  require(d >= 1, "basis needs at least one term");
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (fn_) {
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd row = fn_(data, i);
      require(static_cast<std::size_t>(row.size()) == d, "basis function returned wrong length");
      Z.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return Z;
  }
  for (std::size_t j = 0; j < d; ++j) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    for (const auto& f : terms_[j]) {
      std::vector<double> v = data.column(f.column);
      for (std::size_t i = 0; i < n; ++i)
        col[static_cast<Eigen::Index>(i)] *= std::pow(v[i], f.power);
    }
    Z.col(static_cast<Eigen::Index>(j)) = col;
  }
  return Z;
}

}  // namespace spw
