#pragma once

// Reference implementations written straight from the defining formulas.
// Nothing here calls into the library; the tests compare the two.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using IVec = std::vector<int>;

// ---- exhaustive expectation --------------------------------------------

struct Moments {
  double value = 0.0;
  double total = 0.0;
};

// Sum over every assignment of prod_i p[i][w_i] * f(w), by plain recursion.
inline Moments expectation(const std::vector<Vec>& p, const std::function<double(const IVec&)>& f) {
  Moments m;
  IVec w(p.size(), 0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double prob) {
    if (i == p.size()) {
      m.value += prob * f(w);
      m.total += prob;
      return;
    }
    for (std::size_t v = 0; v < p[i].size(); ++v) {
      w[i] = static_cast<int>(v);
      rec(i + 1, prob * p[i][v]);
    }
  };
  rec(0, 1.0);
  return m;
}

// Per-unit treatment probabilities from per-stratum P{W=1}.
inline std::vector<Vec> unit_probs(const IVec& stratum, const Vec& treated) {
  std::vector<Vec> p;
  for (int k : stratum) p.push_back({1.0 - treated[static_cast<std::size_t>(k)], treated[static_cast<std::size_t>(k)]});
  return p;
}

// ---- stratified estimators ------------------------------------------------

struct Sample {
  Vec y;
  IVec w;
  IVec stratum;  // dense ids
  int strata = 1;
  int levels = 2;

  std::size_t n() const { return y.size(); }
  double N(int k) const {
    return static_cast<double>(std::count(stratum.begin(), stratum.end(), k));
  }
};

// N_{X_i} / (1 + #{j != i in the stratum with W_j = w})
inline double R(const Sample& s, std::size_t i, int w) {
  double peers = 0.0;
  for (std::size_t j = 0; j < s.n(); ++j)
    if (j != i && s.stratum[j] == s.stratum[i] && s.w[j] == w) peers += 1.0;
  return s.N(s.stratum[i]) / (1.0 + peers);
}

inline double mu_tilde(const Sample& s, int w, int k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i)
    if (s.stratum[i] == k && s.w[i] == w) acc += R(s, i, w) * s.y[i];
  return acc / s.N(k);
}

inline double subsample_mean(const Sample& s, int w, int k) {
  double acc = 0.0, c = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i)
    if (s.stratum[i] == k && s.w[i] == w) {
      acc += s.y[i];
      c += 1.0;
    }
  return acc / std::max(1.0, c);
}

inline bool none_with(const Sample& s, int w, int k) {
  for (std::size_t i = 0; i < s.n(); ++i)
    if (s.stratum[i] == k && s.w[i] == w) return false;
  return true;
}

inline double mu_hat(const Sample& s, int w, int k, double t) {
  return mu_tilde(s, w, k) + (none_with(s, w, k) ? t : 0.0);
}

// mean over units of the pooled per-unit contribution
inline double mu_bar(const Sample& s, int w, double t) {
  const double n = static_cast<double>(s.n());
  double total = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    const int xi = s.stratum[i];
    double v = s.w[i] == w ? R(s, i, w) * s.y[i] : 0.0;
    if (none_with(s, w, xi)) {
      if (s.strata == 1) {
        v += t;
      } else {
        double pooled = 0.0;
        for (int k = 0; k < s.strata; ++k)
          if (k != xi) pooled += s.N(k) / (n - s.N(xi)) * mu_hat(s, w, k, t);
        v += pooled;
      }
    }
    total += v;
  }
  return total / n;
}

inline std::pair<double, double> fpw(const Sample& s, const std::vector<std::pair<double, double>>& bounds,
                                     const Vec& kappa) {
  // extrema of a box under a linear map, by brute force over corners
  const int L = s.levels;
  Vec lo(L), hi(L);
  for (int w = 0; w < L; ++w) {
    lo[w] = mu_bar(s, w, bounds[w].first);
    hi[w] = mu_bar(s, w, bounds[w].second);
  }
  double mn = HUGE_VAL, mx = -HUGE_VAL;
  for (unsigned mask = 0; mask < (1u << L); ++mask) {
    double v = 0.0;
    for (int w = 0; w < L; ++w) v += kappa[w] * ((mask >> w) & 1u ? hi[w] : lo[w]);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return {mn, mx};
}

inline double loo_p(const Sample& s, std::size_t i, int w) {
  double peers = 0.0;
  for (std::size_t j = 0; j < s.n(); ++j)
    if (j != i && s.stratum[j] == s.stratum[i] && s.w[j] == w) peers += 1.0;
  return peers / (s.N(s.stratum[i]) - 1.0);
}

inline double scaled_ate(const Sample& s, int a, int b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    if (s.w[i] == a) acc += loo_p(s, i, b) * s.y[i];
    if (s.w[i] == b) acc -= loo_p(s, i, a) * s.y[i];
  }
  return acc / static_cast<double>(s.n());
}

inline double wmd(const Sample& s, const Vec& kappa) {
  double acc = 0.0;
  for (int w = 0; w < s.levels; ++w)
    for (int k = 0; k < s.strata; ++k) acc += kappa[w] * s.N(k) / static_cast<double>(s.n()) * subsample_mean(s, w, k);
  return acc;
}

inline double ipw_fs(const Sample& s, const Vec& kappa) {
  double acc = 0.0;
  for (int w = 0; w < s.levels; ++w)
    for (int k = 0; k < s.strata; ++k) {
      double m = 0.0;
      for (std::size_t i = 0; i < s.n(); ++i)
        if (s.stratum[i] == k && s.w[i] == w)
          m += s.y[i] / std::max(loo_p(s, i, w), 1.0 / (2.0 * s.N(k) - 2.0));
      acc += kappa[w] * s.N(k) / static_cast<double>(s.n()) * m / s.N(k);
    }
  return acc;
}

// ---- weighted least squares ------------------------------------------------

// Solves A x = b by Gaussian elimination with partial pivoting.
inline Vec solve(std::vector<Vec> A, Vec b) {
  const std::size_t d = b.size();
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < d; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < d; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(d);
  for (std::size_t c = d; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < d; ++k) s -= A[c][k] * x[k];
    x[c] = s / A[c][c];
  }
  return x;
}

// beta = [sum (e(1-e))^(nu+1) Z Z']^-1 sum (e(1-e))^nu Z (W-e) Y
inline Vec gpw_beta(const std::vector<Vec>& Z, const IVec& w, const Vec& y, const Vec& e, double nu) {
  const std::size_t d = Z.front().size();
  std::vector<Vec> A(d, Vec(d, 0.0));
  Vec b(d, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = e[i] * (1.0 - e[i]);
    const double a = std::pow(v, nu + 1.0);
    const double g = std::pow(v, nu) * (w[i] - e[i]) * y[i];
    for (std::size_t r = 0; r < d; ++r) {
      b[r] += Z[i][r] * g;
      for (std::size_t c = 0; c < d; ++c) A[r][c] += a * Z[i][r] * Z[i][c];
    }
  }
  return solve(A, b);
}

// ---- residuals at a support point -------------------------------------------

// Binary support point: P{W=1} = e, means m0, m1.
inline double gnpw_wrong_mu_moment(double e, double tau_tilde, double tau, double nu1, double nu2) {
  return std::pow(e, nu1) * std::pow(1.0 - e, nu2) * e * (1.0 - e) * (tau_tilde - tau);
}

inline double gnpw_wrong_e_moment(double e, double et, const double th[4], double tau_tilde,
                                  double tau, double nu1, double nu2) {
  return std::pow(et, nu1) * std::pow(1.0 - et, nu2) *
         (th[0] * e + th[1] * et + th[2] * e * et + th[3] * et * et) * (tau_tilde - tau);
}

inline double robinson_wrong_e_moment(double e, double et, double tau) {
  return (e - et) * (e - et) * tau;
}

}  // namespace oracle
