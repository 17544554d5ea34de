#include "vinedep/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <boost/math/tools/minima.hpp>

#include "bicop_detail.hpp"
#include "vinedep/dependence.hpp"

namespace vinedep {

namespace {

constexpr double kBad = 1e300;

// Box transform: natural parameter in [lo, hi] <-> unconstrained real.
struct BoxMap {
  double lo, hi;
  double to_free(double x) const {
    const double f = std::clamp((x - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
    return std::log(f / (1.0 - f));
  }
  double to_box(double z) const {
    const double f = 1.0 / (1.0 + std::exp(-z));
    return lo + (hi - lo) * f;
  }
};

double brent_min(const std::function<double(double)>& f, double a, double b, int bits,
                 std::uintmax_t iterations, double* arg) {
  const auto r = boost::math::tools::brent_find_minima(f, a, b, bits, iterations);
  *arg = r.first;
  return r.second;
}

struct Simplex2Result {
  double x0, x1, value;
};

// Nelder-Mead on R^2 (standard coefficients 1, 2, 0.5, 0.5).
Simplex2Result nelder_mead2(const std::function<double(double, double)>& f, double x0, double x1,
                            double step0, double step1, int max_iterations) {
  struct P {
    double a, b, f;
  };
  std::array<P, 3> s{P{x0, x1, f(x0, x1)}, P{x0 + step0, x1, f(x0 + step0, x1)},
                     P{x0, x1 + step1, f(x0, x1 + step1)}};
  auto eval = [&](double a, double b) { return P{a, b, f(a, b)}; };
  for (int it = 0; it < max_iterations; ++it) {
    std::sort(s.begin(), s.end(), [](const P& l, const P& r) { return l.f < r.f; });
    const double spread = std::abs(s[2].f - s[0].f);
    const double size = std::max({std::abs(s[1].a - s[0].a), std::abs(s[2].a - s[0].a),
                                  std::abs(s[1].b - s[0].b), std::abs(s[2].b - s[0].b)});
    if (spread < 1e-10 * (1.0 + std::abs(s[0].f)) && size < 1e-7) break;
    const double ca = 0.5 * (s[0].a + s[1].a), cb = 0.5 * (s[0].b + s[1].b);
    const P refl = eval(ca + (ca - s[2].a), cb + (cb - s[2].b));
    if (refl.f < s[0].f) {
      const P expd = eval(ca + 2.0 * (ca - s[2].a), cb + 2.0 * (cb - s[2].b));
      s[2] = expd.f < refl.f ? expd : refl;
    } else if (refl.f < s[1].f) {
      s[2] = refl;
    } else {
      const bool outside = refl.f < s[2].f;
      const P con = outside ? eval(ca + 0.5 * (refl.a - ca), cb + 0.5 * (refl.b - cb))
                            : eval(ca + 0.5 * (s[2].a - ca), cb + 0.5 * (s[2].b - cb));
      if (con.f < std::min(refl.f, s[2].f)) {
        s[2] = con;
      } else {
        for (int k = 1; k < 3; ++k)
          s[k] = eval(s[0].a + 0.5 * (s[k].a - s[0].a), s[0].b + 0.5 * (s[k].b - s[0].b));
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const P& l, const P& r) { return l.f < r.f; });
  return {s[0].a, s[0].b, s[0].f};
}

void check_inputs(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  if (u.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "u and v differ in length");
  if (u.size() < 30) throw Error(ErrorCode::InputOutOfRange, "copula fitting needs at least 30 observations");
  auto inside = [](const Eigen::Ref<const Vector>& w) {
    return (w.array() > 0.0).all() && (w.array() < 1.0).all();
  };
  if (!inside(u) || !inside(v)) throw Error(ErrorCode::InputOutOfRange, "copula data must lie in (0,1)");
}

double negloglik(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
                 const Eigen::Ref<const Vector>& v) {
  if (!is_valid(spec)) return kBad;
  const double ll = copula_loglik(spec, u, v);
  return std::isfinite(ll) ? -ll : kBad;
}

EdgeFit finish(CopulaSpec spec, const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  validate(spec);
  EdgeFit fit;
  fit.spec = std::move(spec);
  fit.loglik = copula_loglik(fit.spec, u, v);
  if (!std::isfinite(fit.loglik))
    throw Error(ErrorCode::ConvergenceFailure,
                "non-finite log-likelihood for " + display_name(fit.spec));
  fit.n_params = param_count(fit.spec.family);
  fit.aic = 2.0 * fit.n_params - 2.0 * fit.loglik;
  return fit;
}

double start_from_tau(Family family, Rotation rotation, double tau, const ParamBounds& box,
                      const std::function<double(double)>& nll) {
  try {
    const CopulaSpec s = param_from_tau(family, tau, rotation);
    return std::clamp(s.params[0], box.lower[0], box.upper[0]);
  } catch (const Error&) {
  }
  // Coarse grid when there is no closed inversion or tau is out of reach.
  const BoxMap map{box.lower[0], box.upper[0]};
  double best = kBad, arg = 0.5 * (box.lower[0] + box.upper[0]);
  for (int k = 0; k < 16; ++k) {
    const double z = -6.0 + 12.0 * (k + 0.5) / 16.0;
    const double x = map.to_box(z);
    const double f = nll(x);
    if (f < best) {
      best = f;
      arg = x;
    }
  }
  return arg;
}

EdgeFit fit_one_param(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v, Family family,
                      Rotation rotation) {
  const ParamBounds box = fit_bounds(family);
  const BoxMap map{box.lower[0], box.upper[0]};
  CopulaSpec spec{family, rotation, {0.0}};
  auto nll = [&](double x) {
    spec.params[0] = x;
    return negloglik(spec, u, v);
  };
  auto nll_free = [&](double z) { return nll(map.to_box(z)); };

  const double tau = kendall_tau(u, v);
  const double z0 = map.to_free(start_from_tau(family, rotation, tau, box, nll));
  double half = 2.0;
  double z = z0, fz = kBad;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const double a = z0 - half, b = z0 + half;
    fz = brent_min(nll_free, a, b, 45, 200, &z);
    if (z - a > 1e-3 * half && b - z > 1e-3 * half) break;
    half *= 2.0;
  }
  if (fz >= kBad) throw Error(ErrorCode::ConvergenceFailure, "no admissible parameter for " + display_name(spec));
  spec.params[0] = map.to_box(z);
  return finish(std::move(spec), u, v);
}

EdgeFit fit_student(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v, Rotation rotation) {
  const ParamBounds box = fit_bounds(Family::StudentT);
  const BoxMap rho_map{box.lower[0], box.upper[0]};
  const BoxMap nu_map{box.lower[1], box.upper[1]};
  const Eigen::Index n = u.size();
  // Student t is radially symmetric; rotations only flip the sign of rho.
  const bool flip = rotation == Rotation::R90 || rotation == Rotation::R270;
  Vector x(n), y(n);
  double best_rho = 0.0;

  auto profile = [&](double nu) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = detail::student_quantile(u[i], nu);
      y[i] = detail::student_quantile(flip ? 1.0 - v[i] : v[i], nu);
    }
    auto inner = [&](double zr) {
      const double rho = rho_map.to_box(zr);
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += detail::student_log_density_xy(rho, nu, x[i], y[i]);
      return std::isfinite(s) ? -s : kBad;
    };
    double zr = 0.0;
    const double f = brent_min(inner, -9.0, 9.0, 45, 200, &zr);
    best_rho = rho_map.to_box(zr);
    return f;
  };

  double znu = 0.0;
  brent_min([&](double z) { return profile(nu_map.to_box(z)); }, -7.0, 7.0, 24, 60, &znu);
  const double nu = nu_map.to_box(znu);
  profile(nu);
  return finish(CopulaSpec{Family::StudentT, rotation, {best_rho, nu}}, u, v);
}

struct GridBox {
  double lo0, hi0, lo1, hi1;
};

GridBox grid_box(Family family) {
  switch (family) {
    case Family::BB7: return {1.05, 4.0, 0.1, 4.0};
    case Family::BB8: return {1.2, 6.0, 0.2, 1.0};
    case Family::Tawn1: return {1.1, 6.0, 0.05, 0.95};
    default: return {0, 1, 0, 1};
  }
}

EdgeFit fit_two_param(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v, Family family,
                      Rotation rotation) {
  const ParamBounds box = fit_bounds(family);
  const BoxMap m0{box.lower[0], box.upper[0]};
  const BoxMap m1{box.lower[1], box.upper[1]};
  CopulaSpec spec{family, rotation, {0.0, 0.0}};
  auto nll = [&](double a, double b) {
    spec.params = {a, b};
    return negloglik(spec, u, v);
  };

  const GridBox g = grid_box(family);
  double best = kBad, s0 = g.lo0, s1 = g.lo1;
  for (int i = 0; i < 8; ++i) {
    const double a = g.lo0 + (g.hi0 - g.lo0) * i / 7.0;
    for (int j = 0; j < 8; ++j) {
      const double b = g.lo1 + (g.hi1 - g.lo1) * j / 7.0;
      const double f = nll(a, b);
      if (f < best) {
        best = f;
        s0 = a;
        s1 = b;
      }
    }
  }
  if (best >= kBad) throw Error(ErrorCode::ConvergenceFailure, "grid search found no admissible point for " + display_name(spec));

  const auto r = nelder_mead2([&](double z0, double z1) { return nll(m0.to_box(z0), m1.to_box(z1)); },
                              m0.to_free(s0), m1.to_free(s1), 0.3, 0.3, 200);
  return finish(CopulaSpec{family, rotation, {m0.to_box(r.x0), m1.to_box(r.x1)}}, u, v);
}

}  // namespace

double copula_loglik(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
                     const Eigen::Ref<const Vector>& v) {
  if (spec.family == Family::Independence) return 0.0;
  return log_density(spec, u, v).sum();
}

double independence_statistic(double tau, std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::sqrt(9.0 * nn * (nn - 1.0) / (2.0 * (2.0 * nn + 5.0))) * std::abs(tau);
}

bool independence_test(double tau, std::size_t n) { return independence_statistic(tau, n) < 2.0; }

EdgeFit fit_bicop_mle(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v, Family family,
                      Rotation rotation) {
  check_inputs(u, v);
  switch (param_count(family)) {
    case 0: return finish(CopulaSpec{Family::Independence, Rotation::R0, {}}, u, v);
    case 1: return fit_one_param(u, v, family, rotation);
    default:
      if (family == Family::StudentT) return fit_student(u, v, rotation);
      return fit_two_param(u, v, family, rotation);
  }
}

EdgeFit select_family_aic(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v,
                          std::span<const Candidate> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::AllCandidatesFailed, "empty candidate list");
  check_inputs(u, v);
  std::vector<std::optional<EdgeFit>> fits(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t k) {
    try {
      fits[k] = fit_bicop_mle(u, v, candidates[k].family, candidates[k].rotation);
    } catch (const Error&) {
      fits[k].reset();
    }
  });
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (!fits[k]) continue;
    if (!best) {
      best = k;
      continue;
    }
    const EdgeFit& a = *fits[k];
    const EdgeFit& b = *fits[*best];
    if (a.aic < b.aic || (a.aic == b.aic && a.n_params < b.n_params)) best = k;
  }
  if (!best) throw Error(ErrorCode::AllCandidatesFailed, "every candidate copula failed to fit");
  return *fits[*best];
}

std::vector<Candidate> default_candidates(double empirical_tau, std::span<const Family> families) {
  std::vector<Candidate> out;
  for (Family f : families) {
    if (!is_rotatable(f)) {
      out.push_back({f, Rotation::R0});
    } else if (empirical_tau >= 0.0) {
      out.push_back({f, Rotation::R0});
      out.push_back({f, Rotation::R180});
    } else {
      out.push_back({f, Rotation::R90});
      out.push_back({f, Rotation::R270});
    }
  }
  return out;
}

}  // namespace vinedep
