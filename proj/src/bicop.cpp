#include "vinedep/bicop.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "bicop_detail.hpp"

namespace vinedep {

using detail::clamp_unit;

int param_count(Family family) {
  switch (family) {
    case Family::Independence: return 0;
    case Family::Gaussian:
    case Family::Clayton:
    case Family::Gumbel:
    case Family::Frank:
    case Family::Joe: return 1;
    case Family::StudentT:
    case Family::BB7:
    case Family::BB8:
    case Family::Tawn1: return 2;
  }
  return 0;
}

bool is_exchangeable(Family family) { return family != Family::Tawn1; }

bool is_rotatable(Family family) {
  switch (family) {
    case Family::Independence:
    case Family::Gaussian:
    case Family::StudentT:
    case Family::Frank: return false;
    default: return true;
  }
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::Independence: return "Independence";
    case Family::Gaussian: return "Gaussian";
    case Family::StudentT: return "Student t";
    case Family::Clayton: return "Clayton";
    case Family::Gumbel: return "Gumbel";
    case Family::Frank: return "Frank";
    case Family::Joe: return "Joe";
    case Family::BB7: return "BB7";
    case Family::BB8: return "BB8";
    case Family::Tawn1: return "Tawn";
  }
  return "";
}

Family family_from_name(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == ' ' || c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "independence" || key == "indep") return Family::Independence;
  if (key == "gaussian" || key == "normal") return Family::Gaussian;
  if (key == "studentt" || key == "t" || key == "student") return Family::StudentT;
  if (key == "clayton") return Family::Clayton;
  if (key == "gumbel") return Family::Gumbel;
  if (key == "frank") return Family::Frank;
  if (key == "joe") return Family::Joe;
  if (key == "bb7") return Family::BB7;
  if (key == "bb8") return Family::BB8;
  if (key == "tawn" || key == "tawn1") return Family::Tawn1;
  throw Error(ErrorCode::InvalidParameter, "unknown copula family '" + std::string(name) + "'");
}

Rotation rotation_from_degrees(int degrees) {
  switch (degrees) {
    case 0: return Rotation::R0;
    case 90: return Rotation::R90;
    case 180: return Rotation::R180;
    case 270: return Rotation::R270;
    default: throw Error(ErrorCode::InvalidParameter, "rotation must be 0, 90, 180 or 270");
  }
}

std::string display_name(const CopulaSpec& spec) {
  const std::string base(family_name(spec.family));
  switch (spec.rotation) {
    case Rotation::R0: return base;
    case Rotation::R180: return "S-" + base;
    case Rotation::R90: return base + "-90";
    case Rotation::R270: return base + "-270";
  }
  return base;
}

namespace {

std::string check_params(const CopulaSpec& s) {
  const auto& p = s.params;
  if (static_cast<int>(p.size()) != param_count(s.family))
    return std::string(family_name(s.family)) + " expects " + std::to_string(param_count(s.family)) +
           " parameter(s)";
  for (double x : p)
    if (!std::isfinite(x)) return "parameters must be finite";
  switch (s.family) {
    case Family::Independence: return {};
    case Family::Gaussian: return std::abs(p[0]) < 1.0 ? "" : "Gaussian rho must lie in (-1,1)";
    case Family::StudentT:
      if (std::abs(p[0]) >= 1.0) return "Student t rho must lie in (-1,1)";
      return p[1] > 2.0 ? "" : "Student t nu must exceed 2";
    case Family::Clayton: return p[0] > 0.0 ? "" : "Clayton theta must be positive";
    case Family::Gumbel: return p[0] >= 1.0 ? "" : "Gumbel theta must be >= 1";
    case Family::Joe: return p[0] >= 1.0 ? "" : "Joe theta must be >= 1";
    case Family::Frank: return p[0] != 0.0 ? "" : "Frank theta must be nonzero";
    case Family::BB7:
      if (p[0] < 1.0) return "BB7 theta must be >= 1";
      return p[1] > 0.0 ? "" : "BB7 delta must be positive";
    case Family::BB8:
      if (p[0] < 1.0) return "BB8 theta must be >= 1";
      return (p[1] > 0.0 && p[1] <= 1.0) ? "" : "BB8 delta must lie in (0,1]";
    case Family::Tawn1:
      if (p[0] < 1.0) return "Tawn theta must be >= 1";
      return (p[1] >= 0.0 && p[1] <= 1.0) ? "" : "Tawn psi must lie in [0,1]";
  }
  return {};
}

double one_minus(double x) { return 1.0 - x; }

}  // namespace

bool is_valid(const CopulaSpec& spec) { return check_params(spec).empty(); }

void validate(const CopulaSpec& spec) {
  if (auto msg = check_params(spec); !msg.empty()) throw Error(ErrorCode::InvalidParameter, msg);
}

ParamBounds fit_bounds(Family family) {
  switch (family) {
    case Family::Independence: return {};
    case Family::Gaussian: return {{-0.999}, {0.999}};
    case Family::StudentT: return {{-0.999, 2.05}, {0.999, 50.0}};
    case Family::Clayton: return {{1e-4}, {28.0}};
    case Family::Gumbel: return {{1.0}, {17.0}};
    case Family::Frank: return {{-35.0}, {35.0}};
    case Family::Joe: return {{1.0}, {30.0}};
    case Family::BB7: return {{1.0, 0.01}, {6.0, 25.0}};
    case Family::BB8: return {{1.0, 0.01}, {8.0, 1.0}};
    case Family::Tawn1: return {{1.0, 0.0}, {20.0, 1.0}};
  }
  return {};
}

// ---------------------------------------------------------------- rotation layer

namespace {

double cdf_unchecked(const CopulaSpec& s, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  u = clamp_unit(u);
  v = clamp_unit(v);
  const detail::Params p(s.params);
  double c = 0.0;
  switch (s.rotation) {
    case Rotation::R0: c = detail::base_cdf(s.family, p, u, v); break;
    case Rotation::R90: c = v - detail::base_cdf(s.family, p, one_minus(u), v); break;
    case Rotation::R180:
      c = u + v - 1.0 + detail::base_cdf(s.family, p, one_minus(u), one_minus(v));
      break;
    case Rotation::R270: c = u - detail::base_cdf(s.family, p, u, one_minus(v)); break;
  }
  return std::clamp(c, std::max(0.0, u + v - 1.0), std::min(u, v));
}

double log_density_unchecked(const CopulaSpec& s, double u, double v) {
  u = clamp_unit(u);
  v = clamp_unit(v);
  const detail::Params p(s.params);
  switch (s.rotation) {
    case Rotation::R0: return detail::base_log_density(s.family, p, u, v);
    case Rotation::R90: return detail::base_log_density(s.family, p, one_minus(u), v);
    case Rotation::R180: return detail::base_log_density(s.family, p, one_minus(u), one_minus(v));
    case Rotation::R270: return detail::base_log_density(s.family, p, u, one_minus(v));
  }
  return 0.0;
}

double hfunc_unchecked(const CopulaSpec& s, double w, double cond, HDirection dir) {
  w = clamp_unit(w);
  cond = clamp_unit(cond);
  const detail::Params p(s.params);
  const Family f = s.family;
  if (dir == HDirection::FirstGivenSecond) {
    switch (s.rotation) {
      case Rotation::R0: return detail::base_h1(f, p, w, cond);
      case Rotation::R90: return 1.0 - detail::base_h1(f, p, one_minus(w), cond);
      case Rotation::R180: return 1.0 - detail::base_h1(f, p, one_minus(w), one_minus(cond));
      case Rotation::R270: return detail::base_h1(f, p, w, one_minus(cond));
    }
  } else {
    switch (s.rotation) {
      case Rotation::R0: return detail::base_h2(f, p, w, cond);
      case Rotation::R90: return detail::base_h2(f, p, w, one_minus(cond));
      case Rotation::R180: return 1.0 - detail::base_h2(f, p, one_minus(w), one_minus(cond));
      case Rotation::R270: return 1.0 - detail::base_h2(f, p, one_minus(w), cond);
    }
  }
  return 0.0;
}

double hinv_unchecked(const CopulaSpec& s, double q, double cond, HDirection dir) {
  q = clamp_unit(q);
  cond = clamp_unit(cond);
  const detail::Params p(s.params);
  const Family f = s.family;
  double r = 0.0;
  if (dir == HDirection::FirstGivenSecond) {
    switch (s.rotation) {
      case Rotation::R0: r = detail::base_hinv1(f, p, q, cond); break;
      case Rotation::R90: r = 1.0 - detail::base_hinv1(f, p, one_minus(q), cond); break;
      case Rotation::R180: r = 1.0 - detail::base_hinv1(f, p, one_minus(q), one_minus(cond)); break;
      case Rotation::R270: r = detail::base_hinv1(f, p, q, one_minus(cond)); break;
    }
  } else {
    switch (s.rotation) {
      case Rotation::R0: r = detail::base_hinv2(f, p, q, cond); break;
      case Rotation::R90: r = detail::base_hinv2(f, p, q, one_minus(cond)); break;
      case Rotation::R180: r = 1.0 - detail::base_hinv2(f, p, one_minus(q), one_minus(cond)); break;
      case Rotation::R270: r = 1.0 - detail::base_hinv2(f, p, one_minus(q), cond); break;
    }
  }
  return clamp_unit(r);
}

}  // namespace

double cdf(const CopulaSpec& spec, double u, double v) {
  validate(spec);
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
    throw Error(ErrorCode::InputOutOfRange, "cdf arguments must lie in [0,1]");
  return cdf_unchecked(spec, u, v);
}

double log_density(const CopulaSpec& spec, double u, double v) {
  validate(spec);
  return log_density_unchecked(spec, u, v);
}

double density(const CopulaSpec& spec, double u, double v) {
  const double ld = log_density(spec, u, v);
  if (ld > 700.0) throw Error(ErrorCode::NumericalOverflow, "copula density overflows");
  return std::exp(ld);
}

double hfunc(const CopulaSpec& spec, double u, double cond, HDirection direction) {
  validate(spec);
  return std::clamp(hfunc_unchecked(spec, u, cond, direction), 0.0, 1.0);
}

double hinv(const CopulaSpec& spec, double p, double cond, HDirection direction) {
  validate(spec);
  return hinv_unchecked(spec, p, cond, direction);
}

Vector log_density(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
                   const Eigen::Ref<const Vector>& v) {
  validate(spec);
  if (u.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "u and v differ in length");
  Vector out(u.size());
  if (spec.family == Family::Independence) return out.setZero();
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = log_density_unchecked(spec, u[i], v[i]);
  return out;
}

Vector hfunc(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
             const Eigen::Ref<const Vector>& cond, HDirection direction) {
  validate(spec);
  if (u.size() != cond.size()) throw Error(ErrorCode::LengthMismatch, "u and cond differ in length");
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out[i] = std::clamp(hfunc_unchecked(spec, u[i], cond[i], direction), 0.0, 1.0);
  return out;
}

Vector hinv(const CopulaSpec& spec, const Eigen::Ref<const Vector>& p,
            const Eigen::Ref<const Vector>& cond, HDirection direction) {
  validate(spec);
  if (p.size() != cond.size()) throw Error(ErrorCode::LengthMismatch, "p and cond differ in length");
  Vector out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = hinv_unchecked(spec, p[i], cond[i], direction);
  return out;
}

Matrix sample(const CopulaSpec& spec, Eigen::Index n, std::uint64_t seed) {
  validate(spec);
  if (n < 1) throw Error(ErrorCode::InputOutOfRange, "sample size must be positive");
  UniformStream rng(seed);
  Matrix out(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w1 = rng.next();
    const double w2 = rng.next();
    out(i, 0) = w1;
    out(i, 1) = hinv_unchecked(spec, w2, w1, HDirection::SecondGivenFirst);
  }
  return out;
}

// ---------------------------------------------------------------- dependence summaries

double debye1(double x) {
  if (x == 0.0) return 1.0;
  const double ax = std::abs(x);
  auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, ax, 15, 1e-14);
  const double d = integral / ax;
  return x > 0.0 ? d : d + ax / 2.0;
}

namespace {

double frank_tau(double theta) {
  if (theta < 0.0) return -frank_tau(-theta);
  if (theta < 1e-8) return 0.0;
  return 1.0 - 4.0 / theta * (1.0 - debye1(theta));
}

double base_tau(const CopulaSpec& s) {
  const auto& p = s.params;
  switch (s.family) {
    case Family::Independence: return 0.0;
    case Family::Gaussian:
    case Family::StudentT: return 2.0 / std::numbers::pi * std::asin(p[0]);
    case Family::Clayton: return p[0] / (p[0] + 2.0);
    case Family::Gumbel: return 1.0 - 1.0 / p[0];
    case Family::Frank: return frank_tau(p[0]);
    case Family::Joe:
    case Family::BB7:
    case Family::BB8: return detail::archimedean_tau(s.family, p);
    case Family::Tawn1: return detail::tawn_tau(p);
  }
  return 0.0;
}

TailDependence base_tails(const CopulaSpec& s) {
  const auto& p = s.params;
  auto upper_from_theta = [](double th) { return 2.0 - std::pow(2.0, 1.0 / th); };
  switch (s.family) {
    case Family::Independence:
    case Family::Gaussian:
    case Family::Frank: return {0.0, 0.0};
    case Family::StudentT: {
      const double rho = p[0], nu = p[1];
      const double arg = -std::sqrt((nu + 1.0) * (1.0 - rho) / (1.0 + rho));
      const double lam = 2.0 * detail::student_cdf(arg, nu + 1.0);
      return {lam, lam};
    }
    case Family::Clayton: return {std::pow(2.0, -1.0 / p[0]), 0.0};
    case Family::Gumbel:
    case Family::Joe: return {0.0, upper_from_theta(p[0])};
    case Family::BB7: return {std::pow(2.0, -1.0 / p[1]), upper_from_theta(p[0])};
    case Family::BB8: return {0.0, p[1] == 1.0 ? upper_from_theta(p[0]) : 0.0};
    case Family::Tawn1: {
      const double th = p[0], psi = p[1];
      return {0.0, 1.0 + psi - std::pow(1.0 + std::pow(psi, th), 1.0 / th)};
    }
  }
  return {};
}

}  // namespace

double theoretical_tau(const CopulaSpec& spec) {
  validate(spec);
  const double tau = base_tau(spec);
  const bool negate = spec.rotation == Rotation::R90 || spec.rotation == Rotation::R270;
  return std::clamp(negate ? -tau : tau, -1.0, 1.0);
}

TailDependence tail_dependence(const CopulaSpec& spec) {
  validate(spec);
  TailDependence t = base_tails(spec);
  t.lambda_lower = std::clamp(t.lambda_lower, 0.0, 1.0);
  t.lambda_upper = std::clamp(t.lambda_upper, 0.0, 1.0);
  switch (spec.rotation) {
    case Rotation::R0: return t;
    case Rotation::R180: return {t.lambda_upper, t.lambda_lower};
    case Rotation::R90:
    case Rotation::R270: return {0.0, 0.0};
  }
  return t;
}

CopulaSpec param_from_tau(Family family, double tau, Rotation rotation) {
  if (!(tau > -1.0 && tau < 1.0))
    throw Error(ErrorCode::UnattainableTau, "tau must lie strictly inside (-1,1)");
  const bool negating = rotation == Rotation::R90 || rotation == Rotation::R270;
  const double t = negating ? -tau : tau;
  CopulaSpec spec{family, rotation, {}};
  switch (family) {
    case Family::Clayton:
      if (t <= 0.0) throw Error(ErrorCode::UnattainableTau, "Clayton needs positive dependence for this rotation");
      spec.params = {2.0 * t / (1.0 - t)};
      break;
    case Family::Gumbel:
      if (t < 0.0) throw Error(ErrorCode::UnattainableTau, "Gumbel needs non-negative dependence for this rotation");
      spec.params = {1.0 / (1.0 - t)};
      break;
    case Family::Gaussian: spec.params = {std::sin(std::numbers::pi * t / 2.0)}; break;
    case Family::Frank: {
      if (t == 0.0) throw Error(ErrorCode::UnattainableTau, "Frank cannot represent tau = 0");
      const double target = std::abs(t);
      double hi = 50.0;
      while (frank_tau(hi) < target) {
        hi *= 4.0;
        if (hi > 1e5) throw Error(ErrorCode::UnattainableTau, "Frank tau too close to 1");
      }
      std::uintmax_t iterations = 200;
      const auto root = boost::math::tools::toms748_solve(
          [&](double th) { return frank_tau(th) - target; }, 1e-8, hi,
          boost::math::tools::eps_tolerance<double>(48), iterations);
      const double theta = 0.5 * (root.first + root.second);
      spec.params = {t > 0.0 ? theta : -theta};
      break;
    }
    default:
      throw Error(ErrorCode::InvalidParameter,
                  std::string(family_name(family)) + " has no one-parameter tau inversion");
  }
  validate(spec);
  return spec;
}

}  // namespace vinedep
