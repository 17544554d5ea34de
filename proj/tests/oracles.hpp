#pragma once
// Reference implementations used only by tests. Nothing here calls into the
// library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace oracle {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre nodes on (a, b) by Newton iteration on P_n.
inline Rule gauss_legendre(int n, double a = 0.0, double b = 1.0) {
  Rule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.x[static_cast<std::size_t>(i)] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    r.w[static_cast<std::size_t>(i)] = (b - a) / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

// Composite rule: `panels` equal panels with `n` nodes each.
inline Rule composite(int panels, int n) {
  Rule out;
  for (int p = 0; p < panels; ++p) {
    const Rule r = gauss_legendre(n, static_cast<double>(p) / panels, static_cast<double>(p + 1) / panels);
    out.x.insert(out.x.end(), r.x.begin(), r.x.end());
    out.w.insert(out.w.end(), r.w.begin(), r.w.end());
  }
  return out;
}

inline double integrate2(const Rule& r, const std::function<double(double, double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    for (std::size_t j = 0; j < r.x.size(); ++j) s += r.w[i] * r.w[j] * f(r.x[i], r.x[j]);
  return s;
}

inline double integrate3(const Rule& r, const std::function<double(double, double, double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    for (std::size_t j = 0; j < r.x.size(); ++j)
      for (std::size_t k = 0; k < r.x.size(); ++k) s += r.w[i] * r.w[j] * r.w[k] * f(r.x[i], r.x[j], r.x[k]);
  return s;
}

// O(N^2) Kendall tau straight from the pair definitions.
inline double brute_tau(const std::vector<double>& x, const std::vector<double>& y, bool tau_b) {
  const std::size_t n = x.size();
  double conc = 0, disc = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) tx += 1;
      if (dy == 0) ty += 1;
      if (dx * dy > 0) conc += 1;
      if (dx * dy < 0) disc += 1;
    }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (!tau_b) return (conc - disc) / pairs;
  const double den = std::sqrt((pairs - tx) * (pairs - ty));
  return den == 0 ? 0.0 : (conc - disc) / den;
}

// Every spanning tree of the complete graph on d nodes, as edge lists (i<j).
inline std::vector<std::vector<std::pair<int, int>>> spanning_trees(int d) {
  std::vector<std::pair<int, int>> all;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) all.emplace_back(i, j);
  std::vector<std::vector<std::pair<int, int>>> out;
  const int m = static_cast<int>(all.size());
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != d - 1) continue;
    std::vector<int> parent(static_cast<std::size_t>(d));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { return parent[static_cast<std::size_t>(a)] == a ? a : find(parent[static_cast<std::size_t>(a)]); };
    bool ok = true;
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < m && ok; ++e) {
      if (!(mask & (1u << e))) continue;
      const int a = find(all[static_cast<std::size_t>(e)].first), b = find(all[static_cast<std::size_t>(e)].second);
      if (a == b) ok = false;
      parent[static_cast<std::size_t>(a)] = b;
      edges.push_back(all[static_cast<std::size_t>(e)]);
    }
    if (ok) out.push_back(edges);
  }
  return out;
}

inline double central_diff(const std::function<double(double)>& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

// Root of increasing f on [lo, hi] by plain bisection.
inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double norm_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

// Closed-form copulas written out independently.
inline double clayton_cdf(double u, double v, double th) {
  return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
}
inline double clayton_h(double u, double v, double th) {  // dC/dv
  return std::pow(v, -th - 1.0) * std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th - 1.0);
}
inline double clayton_log_density(double u, double v, double th) {
  const double a = std::pow(u, -th) + std::pow(v, -th) - 1.0;
  return std::log1p(th) - (1.0 + th) * (std::log(u) + std::log(v)) - (2.0 + 1.0 / th) * std::log(a);
}
// Second derivative in theta of the Clayton log density.
inline double clayton_log_density_dtheta2(double u, double v, double th) {
  const double lu = std::log(u), lv = std::log(v);
  const double pu = std::pow(u, -th), pv = std::pow(v, -th);
  const double a = pu + pv - 1.0;
  const double a1 = -(pu * lu + pv * lv);
  const double a2 = pu * lu * lu + pv * lv * lv;
  return -1.0 / ((1.0 + th) * (1.0 + th)) - 2.0 * std::log(a) / (th * th * th) + 2.0 * a1 / (th * th * a) -
         (2.0 + 1.0 / th) * (a2 * a - a1 * a1) / (a * a);
}
inline double gumbel_cdf(double u, double v, double th) {
  return std::exp(-std::pow(std::pow(-std::log(u), th) + std::pow(-std::log(v), th), 1.0 / th));
}
inline double gumbel_h(double u, double v, double th) {
  const double x = std::pow(-std::log(u), th), y = std::pow(-std::log(v), th);
  return gumbel_cdf(u, v, th) * std::pow(x + y, 1.0 / th - 1.0) * std::pow(-std::log(v), th - 1.0) / v;
}
inline double frank_cdf(double u, double v, double th) {
  return -std::log1p(std::expm1(-th * u) * std::expm1(-th * v) / std::expm1(-th)) / th;
}
inline double frank_h(double u, double v, double th) {
  const double eu = std::expm1(-th * u), ev = std::expm1(-th * v), e1 = std::expm1(-th);
  return std::exp(-th * v) * eu / (e1 + eu * ev);
}
inline double gaussian_h(double u, double v, double rho) {
  return norm_cdf((norm_quantile(u) - rho * norm_quantile(v)) / std::sqrt(1.0 - rho * rho));
}
inline double gaussian_density(double u, double v, double rho) {
  const double x = norm_quantile(u), y = norm_quantile(v), r2 = 1.0 - rho * rho;
  return std::exp(-(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)) / std::sqrt(r2);
}

// Kendall tau of an exchangeable copula from its h-function:
// tau = 1 - 4 * int int dC/du * dC/dv du dv.
inline double tau_by_quadrature(const std::function<double(double, double)>& h_first_given_second,
                                const std::function<double(double, double)>& h_second_given_first) {
  const Rule r = composite(40, 16);
  return 1.0 - 4.0 * integrate2(r, [&](double u, double v) {
           return h_first_given_second(u, v) * h_second_given_first(v, u);
         });
}

// Standard error of empirical Kendall tau under independence.
inline double tau_se(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::sqrt(2.0 * (2.0 * nn + 5.0) / (9.0 * nn * (nn - 1.0)));
}

}  // namespace oracle
