#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <boost/math/tools/roots.hpp>

#include "bicop_detail.hpp"

namespace vinedep::detail {

namespace {

using boost::math::quadrature::gauss_kronrod;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// C is evaluated at the copula value, which can underflow in the far corner.
double guard_positive(double x) { return std::max(x, DBL_MIN); }

/// Inverts an increasing map g: [kUnitClamp, 1 - kUnitClamp] -> [0, 1].
template <class F>
double invert_increasing(F&& g, double target) {
  const double lo = kUnitClamp;
  const double hi = 1.0 - kUnitClamp;
  const double glo = g(lo) - target;
  if (glo >= 0.0) return lo;
  const double ghi = g(hi) - target;
  if (ghi <= 0.0) return hi;
  std::uintmax_t iterations = 200;
  const auto result = boost::math::tools::toms748_solve(
      [&](double x) { return g(x) - target; }, lo, hi, glo, ghi,
      boost::math::tools::eps_tolerance<double>(50), iterations);
  if (iterations >= 200)
    throw Error(ErrorCode::ConvergenceFailure, "h-function inversion did not converge");
  return 0.5 * (result.first + result.second);
}

// ---------------------------------------------------------------- Archimedean
// Each generator supplies phi, phi^-1, log(-phi') and log(phi'').

struct GumbelGen {
  double theta;
  double phi(double t) const { return std::pow(-std::log(t), theta); }
  double phi_inv(double x) const { return std::exp(-std::pow(x, 1.0 / theta)); }
  double log_neg_dphi(double t) const {
    return std::log(theta) + (theta - 1.0) * std::log(-std::log(t)) - std::log(t);
  }
};

struct JoeGen {
  double theta;
  double phi(double t) const { return -std::log1p(-std::pow(1.0 - t, theta)); }
  double phi_inv(double x) const { return 1.0 - std::pow(-std::expm1(-x), 1.0 / theta); }
  double log_neg_dphi(double t) const {
    const double s = 1.0 - t;
    return std::log(theta) + (theta - 1.0) * std::log(s) - std::log1p(-std::pow(s, theta));
  }
};

struct BB7Gen {
  double theta, delta;
  double log_g(double t) const { return std::log1p(-std::pow(1.0 - t, theta)); }
  double phi(double t) const { return std::expm1(-delta * log_g(t)); }
  double phi_inv(double x) const {
    const double lg = -std::log1p(x) / delta;
    const double one_minus_g = -std::expm1(lg);
    return 1.0 - std::pow(one_minus_g, 1.0 / theta);
  }
  double log_neg_dphi(double t) const {
    const double s = 1.0 - t;
    return std::log(delta * theta) + (theta - 1.0) * std::log(s) + (-delta - 1.0) * log_g(t);
  }
  double log_d2phi(double t) const {
    const double s = 1.0 - t;
    const double st = std::pow(s, theta);
    const double g = 1.0 - st;
    return std::log(delta * theta) + (theta - 2.0) * std::log(s) + (-delta - 2.0) * std::log(g) +
           std::log((theta - 1.0) * g + (delta + 1.0) * theta * st);
  }
};

struct BB8Gen {
  double theta, delta;
  double log_eta() const { return std::log1p(-std::pow(1.0 - delta, theta)); }
  double phi(double t) const { return log_eta() - std::log1p(-std::pow(1.0 - delta * t, theta)); }
  double phi_inv(double x) const {
    const double g = std::exp(log_eta() - x);
    const double s = std::pow(1.0 - g, 1.0 / theta);
    return (1.0 - s) / delta;
  }
  double log_neg_dphi(double t) const {
    const double s = 1.0 - delta * t;
    return std::log(theta * delta) + (theta - 1.0) * std::log(s) -
           std::log1p(-std::pow(s, theta));
  }
  double log_d2phi(double t) const {
    const double s = 1.0 - delta * t;
    const double st = std::pow(s, theta);
    const double g = 1.0 - st;
    return std::log(theta) + 2.0 * std::log(delta) + (theta - 2.0) * std::log(s) +
           std::log((theta - 1.0) * g + theta * st) - 2.0 * std::log(g);
  }
};

template <class G>
double arch_cdf(const G& g, double u, double v) {
  return clamp01(g.phi_inv(g.phi(u) + g.phi(v)));
}

template <class G>
double arch_h1(const G& g, double u, double v) {
  const double c = guard_positive(arch_cdf(g, u, v));
  return clamp01(std::exp(g.log_neg_dphi(v) - g.log_neg_dphi(c)));
}

template <class G>
double arch_log_density(const G& g, double u, double v) {
  const double c = guard_positive(arch_cdf(g, u, v));
  return g.log_d2phi(c) + g.log_neg_dphi(u) + g.log_neg_dphi(v) - 3.0 * g.log_neg_dphi(c);
}

template <class G>
double arch_tau(const G& g) {
  auto ratio = [&](double t) {
    const double ph = g.phi(t);
    if (ph == 0.0 || !std::isfinite(ph)) return 0.0;
    return -ph * std::exp(-g.log_neg_dphi(t));
  };
  const double integral = gauss_kronrod<double, 61>::integrate(ratio, 0.0, 1.0, 15, 1e-12);
  return 1.0 + 4.0 * integral;
}

// ---------------------------------------------------------------- Clayton

double clayton_log_s(double th, double u, double v) {
  // log(u^-th + v^-th - 1)
  return std::log(std::pow(u, -th) + std::pow(v, -th) - 1.0);
}

double clayton_cdf(double th, double u, double v) {
  return clamp01(std::exp(-clayton_log_s(th, u, v) / th));
}

double clayton_h1(double th, double u, double v) {
  return clamp01(std::exp((-th - 1.0) * std::log(v) + (-1.0 - 1.0 / th) * clayton_log_s(th, u, v)));
}

double clayton_hinv1(double th, double q, double v) {
  const double a = std::pow(q * std::pow(v, th + 1.0), -th / (1.0 + th));
  return std::pow(a + 1.0 - std::pow(v, -th), -1.0 / th);
}

double clayton_log_density(double th, double u, double v) {
  return std::log1p(th) + (-1.0 - th) * (std::log(u) + std::log(v)) +
         (-2.0 - 1.0 / th) * clayton_log_s(th, u, v);
}

// ---------------------------------------------------------------- Gumbel

double gumbel_cdf(double th, double u, double v) {
  const double t = std::pow(-std::log(u), th) + std::pow(-std::log(v), th);
  return std::exp(-std::pow(t, 1.0 / th));
}

double gumbel_h1(double th, double u, double v) {
  const double y = -std::log(v);
  const double t = std::pow(-std::log(u), th) + std::pow(y, th);
  const double a = std::pow(t, 1.0 / th);
  return clamp01(std::exp(-a + (th - 1.0) * std::log(y) - std::log(v) + (1.0 / th - 1.0) * std::log(t)));
}

double gumbel_log_density(double th, double u, double v) {
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double t = std::pow(x, th) + std::pow(y, th);
  const double a = std::pow(t, 1.0 / th);
  return -a - std::log(u) - std::log(v) + (th - 1.0) * (std::log(x) + std::log(y)) +
         (2.0 / th - 2.0) * std::log(t) + std::log1p((th - 1.0) / a);
}

// ---------------------------------------------------------------- Frank
// a = e^{-th u} - 1, b = e^{-th v} - 1, c = e^{-th} - 1.

bool frank_degenerate(double th) { return std::abs(th) < 1e-8; }

double frank_cdf(double th, double u, double v) {
  if (frank_degenerate(th)) return u * v;
  const double a = std::expm1(-th * u), b = std::expm1(-th * v), c = std::expm1(-th);
  return clamp01(-std::log1p(a * b / c) / th);
}

double frank_h1(double th, double u, double v) {
  if (frank_degenerate(th)) return u;
  const double a = std::expm1(-th * u), b = std::expm1(-th * v), c = std::expm1(-th);
  return clamp01(std::exp(-th * v) * a / (c + a * b));
}

double frank_hinv1(double th, double q, double v) {
  if (frank_degenerate(th)) return q;
  const double c = std::expm1(-th);
  const double a = c / ((1.0 / q - 1.0) * std::exp(-th * v) + 1.0);
  return -std::log1p(a) / th;
}

double frank_log_density(double th, double u, double v) {
  if (frank_degenerate(th)) return 0.0;
  const double a = std::expm1(-th * u), b = std::expm1(-th * v), c = std::expm1(-th);
  return std::log(-th * c) - th * (u + v) - 2.0 * std::log(std::abs(c + a * b));
}

// ---------------------------------------------------------------- Joe
// With p = (1-u)^th, q = (1-v)^th, S = p + q - p q.

double joe_pow(double th, double u) { return std::exp(th * std::log1p(-u)); }

double joe_log_s(double th, double u, double v) {
  const double p = joe_pow(th, u), q = joe_pow(th, v);
  return std::log(p + q - p * q);
}

double joe_cdf(double th, double u, double v) { return clamp01(-std::expm1(joe_log_s(th, u, v) / th)); }

double joe_h1(double th, double u, double v) {
  const double one_minus_p = -std::expm1(th * std::log1p(-u));
  return clamp01(std::exp((1.0 / th - 1.0) * joe_log_s(th, u, v) + (th - 1.0) * std::log1p(-v)) * one_minus_p);
}

double joe_log_density(double th, double u, double v) {
  const double log_s = joe_log_s(th, u, v);
  return (1.0 / th - 2.0) * log_s + (th - 1.0) * (std::log1p(-u) + std::log1p(-v)) +
         std::log(th - 1.0 + std::exp(log_s));
}

// ---------------------------------------------------------------- Tawn type 1
// Pickands A(t) = (1-psi)(1-t) + ((psi(1-t))^th + t^th)^(1/th), t = log v / log(uv).

struct Pickands {
  double a, d1, d2;
};

Pickands tawn_pickands_all(double th, double psi, double t) {
  if (psi == 0.0) return {1.0, 0.0, 0.0};
  const double a = psi * (1.0 - t);
  const double b = t;
  const double big_b = std::pow(a, th) + std::pow(b, th);
  Pickands p{};
  p.a = (1.0 - psi) * (1.0 - t) + std::pow(big_b, 1.0 / th);
  p.d1 = -(1.0 - psi) + std::pow(big_b, 1.0 / th - 1.0) * (std::pow(b, th - 1.0) - psi * std::pow(a, th - 1.0));
  p.d2 = th == 1.0 ? 0.0
                   : (th - 1.0) * psi * psi * std::pow(big_b, 1.0 / th - 2.0) * std::pow(a * b, th - 2.0);
  return p;
}

struct TawnTerms {
  double ell, ell_x, ell_y, cross;
};

TawnTerms tawn_terms(double th, double psi, double u, double v) {
  const double x = -std::log(u), y = -std::log(v);
  const double s = x + y;
  const double t = y / s;
  const Pickands pk = tawn_pickands_all(th, psi, t);
  return {s * pk.a, pk.a - t * pk.d1, pk.a + (1.0 - t) * pk.d1, pk.d2 * t * (1.0 - t) / s};
}

double tawn_cdf(double th, double psi, double u, double v) {
  return clamp01(std::exp(-tawn_terms(th, psi, u, v).ell));
}

double tawn_h1(double th, double psi, double u, double v) {
  const TawnTerms k = tawn_terms(th, psi, u, v);
  return clamp01(std::exp(-k.ell - std::log(v)) * k.ell_y);
}

double tawn_h2(double th, double psi, double v, double u) {
  const TawnTerms k = tawn_terms(th, psi, u, v);
  return clamp01(std::exp(-k.ell - std::log(u)) * k.ell_x);
}

double tawn_log_density(double th, double psi, double u, double v) {
  const TawnTerms k = tawn_terms(th, psi, u, v);
  return -k.ell - std::log(u) - std::log(v) + std::log(k.ell_x * k.ell_y + k.cross);
}

// ---------------------------------------------------------------- elliptical

double gaussian_h1(double rho, double u, double v) {
  const double x = normal_quantile(u), y = normal_quantile(v);
  return clamp01(normal_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho)));
}

double gaussian_hinv1(double rho, double q, double v) {
  const double y = normal_quantile(v);
  return normal_cdf(std::sqrt(1.0 - rho * rho) * normal_quantile(q) + rho * y);
}

double student_h1(double rho, double nu, double u, double v) {
  const double x = student_quantile(u, nu), y = student_quantile(v, nu);
  const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return clamp01(student_cdf((x - rho * y) / scale, nu + 1.0));
}

double student_hinv1(double rho, double nu, double q, double v) {
  const double y = student_quantile(v, nu);
  const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return student_cdf(student_quantile(q, nu + 1.0) * scale + rho * y, nu);
}

// Bivariate normal cdf via Owen's T function.
double bivariate_normal_cdf(double x, double y, double rho) {
  if (x == 0.0 && y == 0.0) return 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
  const double r = std::sqrt(1.0 - rho * rho);
  auto term = [&](double a, double b) {
    if (a == 0.0) return b >= 0.0 ? 0.25 : -0.25;
    return boost::math::owens_t(a, (b - rho * a) / (a * r));
  };
  const double beta = (x * y > 0.0 || (x * y == 0.0 && x + y >= 0.0)) ? 0.0 : 0.5;
  return 0.5 * normal_cdf(x) + 0.5 * normal_cdf(y) - term(x, y) - term(y, x) - beta;
}

double gaussian_cdf(double rho, double u, double v) {
  // Radial symmetry keeps the evaluated corner small for accuracy.
  if (u + v > 1.0) return clamp01(u + v - 1.0 + gaussian_cdf(rho, 1.0 - u, 1.0 - v));
  return clamp01(bivariate_normal_cdf(normal_quantile(clamp_unit(u)), normal_quantile(clamp_unit(v)), rho));
}

// Student t cdf: integrate F_{nu+1}((x - rho s) / scale(s)) f_nu(s) over s <= y.
double student_copula_cdf(double rho, double nu, double u, double v) {
  if (u + v > 1.0) return clamp01(u + v - 1.0 + student_copula_cdf(rho, nu, 1.0 - u, 1.0 - v));
  const double x = student_quantile(clamp_unit(u), nu), y = student_quantile(clamp_unit(v), nu);
  const boost::math::students_t_distribution<double> t_nu(nu);
  const double c = (1.0 - rho * rho) / (nu + 1.0);
  auto f = [&](double s) {
    const double scale = std::sqrt((nu + s * s) * c);
    return student_cdf((x - rho * s) / scale, nu + 1.0) * boost::math::pdf(t_nu, s);
  };
  const double val = gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(), y, 12, 1e-12);
  return clamp01(val);
}

}  // namespace

// ---------------------------------------------------------------- shared helpers

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

double student_cdf(double x, double nu) {
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), x);
}

double student_quantile(double p, double nu) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

double gaussian_log_density_xy(double rho, double x, double y) {
  const double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double student_log_density_xy(double rho, double nu, double x, double y) {
  const double r2 = 1.0 - rho * rho;
  const double log_joint = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                           std::log(nu * std::numbers::pi) - 0.5 * std::log(r2) -
                           0.5 * (nu + 2.0) * std::log1p((x * x + y * y - 2.0 * rho * x * y) / (nu * r2));
  const double log_marg_const =
      std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
  const double log_mx = log_marg_const - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  const double log_my = log_marg_const - 0.5 * (nu + 1.0) * std::log1p(y * y / nu);
  return log_joint - log_mx - log_my;
}

double tawn_pickands(Params p, double t) { return tawn_pickands_all(p[0], p[1], t).a; }

double tawn_tau(Params p) {
  if (p[1] == 0.0 || p[0] == 1.0) return 0.0;
  auto integrand = [&](double t) {
    const Pickands pk = tawn_pickands_all(p[0], p[1], t);
    return t * (1.0 - t) * pk.d2 / pk.a;
  };
  return gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-12);
}

double archimedean_tau(Family f, Params p) {
  switch (f) {
    case Family::Gumbel: return arch_tau(GumbelGen{p[0]});
    case Family::Joe: return arch_tau(JoeGen{p[0]});
    case Family::BB7: return arch_tau(BB7Gen{p[0], p[1]});
    case Family::BB8: return arch_tau(BB8Gen{p[0], p[1]});
    default: throw Error(ErrorCode::InvalidParameter, "no generator tau for this family");
  }
}

double base_cdf(Family f, Params p, double u, double v) {
  switch (f) {
    case Family::Independence: return u * v;
    case Family::Gaussian:
      return gaussian_cdf(p[0], u, v);
    case Family::StudentT:
      return student_copula_cdf(p[0], p[1], u, v);
    case Family::Clayton: return clayton_cdf(p[0], u, v);
    case Family::Gumbel: return gumbel_cdf(p[0], u, v);
    case Family::Frank: return frank_cdf(p[0], u, v);
    case Family::Joe: return joe_cdf(p[0], u, v);
    case Family::BB7: return arch_cdf(BB7Gen{p[0], p[1]}, u, v);
    case Family::BB8: return arch_cdf(BB8Gen{p[0], p[1]}, u, v);
    case Family::Tawn1: return tawn_cdf(p[0], p[1], u, v);
  }
  return 0.0;
}

double base_log_density(Family f, Params p, double u, double v) {
  switch (f) {
    case Family::Independence: return 0.0;
    case Family::Gaussian:
      return gaussian_log_density_xy(p[0], normal_quantile(u), normal_quantile(v));
    case Family::StudentT:
      return student_log_density_xy(p[0], p[1], student_quantile(u, p[1]), student_quantile(v, p[1]));
    case Family::Clayton: return clayton_log_density(p[0], u, v);
    case Family::Gumbel: return gumbel_log_density(p[0], u, v);
    case Family::Frank: return frank_log_density(p[0], u, v);
    case Family::Joe: return joe_log_density(p[0], u, v);
    case Family::BB7: return arch_log_density(BB7Gen{p[0], p[1]}, u, v);
    case Family::BB8: return arch_log_density(BB8Gen{p[0], p[1]}, u, v);
    case Family::Tawn1: return tawn_log_density(p[0], p[1], u, v);
  }
  return 0.0;
}

double base_h1(Family f, Params p, double u, double v) {
  switch (f) {
    case Family::Independence: return u;
    case Family::Gaussian: return gaussian_h1(p[0], u, v);
    case Family::StudentT: return student_h1(p[0], p[1], u, v);
    case Family::Clayton: return clayton_h1(p[0], u, v);
    case Family::Gumbel: return gumbel_h1(p[0], u, v);
    case Family::Frank: return frank_h1(p[0], u, v);
    case Family::Joe: return joe_h1(p[0], u, v);
    case Family::BB7: return arch_h1(BB7Gen{p[0], p[1]}, u, v);
    case Family::BB8: return arch_h1(BB8Gen{p[0], p[1]}, u, v);
    case Family::Tawn1: return tawn_h1(p[0], p[1], u, v);
  }
  return 0.0;
}

double base_h2(Family f, Params p, double v, double u) {
  if (f == Family::Tawn1) return tawn_h2(p[0], p[1], v, u);
  return base_h1(f, p, v, u);
}

double base_hinv1(Family f, Params p, double q, double v) {
  switch (f) {
    case Family::Independence: return q;
    case Family::Gaussian: return clamp_unit(gaussian_hinv1(p[0], q, v));
    case Family::StudentT: return clamp_unit(student_hinv1(p[0], p[1], q, v));
    case Family::Clayton: return clamp_unit(clayton_hinv1(p[0], q, v));
    case Family::Frank: return clamp_unit(frank_hinv1(p[0], q, v));
    default: return invert_increasing([&](double u) { return base_h1(f, p, u, v); }, q);
  }
}

double base_hinv2(Family f, Params p, double q, double u) {
  if (f == Family::Tawn1)
    return invert_increasing([&](double v) { return tawn_h2(p[0], p[1], v, u); }, q);
  return base_hinv1(f, p, q, u);
}

}  // namespace vinedep::detail
