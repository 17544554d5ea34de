#pragma once

// Unrotated family kernels. Arguments are already clamped to the open unit
// square and parameters validated.

#include <span>

#include "vinedep/bicop.hpp"

namespace vinedep::detail {

using Params = std::span<const double>;

double base_cdf(Family f, Params p, double u, double v);
double base_log_density(Family f, Params p, double u, double v);
// dC(u,v)/dv
double base_h1(Family f, Params p, double u, double v);
// dC(u,v)/du, reported as F(v | u)
double base_h2(Family f, Params p, double v, double u);
// inverse of base_h1 in u for fixed v
double base_hinv1(Family f, Params p, double q, double v);
// inverse of base_h2 in v for fixed u
double base_hinv2(Family f, Params p, double q, double u);

double normal_cdf(double x);
double normal_quantile(double p);
double student_cdf(double x, double nu);
double student_quantile(double p, double nu);

// Student t copula log-density from quantile-scale coordinates.
double student_log_density_xy(double rho, double nu, double x, double y);
double gaussian_log_density_xy(double rho, double x, double y);

// Archimedean tau via 1 + 4 int_0^1 phi / phi' dt.
double archimedean_tau(Family f, Params p);
// Extreme-value tau via int_0^1 t(1-t) A''(t) / A(t) dt.
double tawn_tau(Params p);
double tawn_pickands(Params p, double t);

inline double clamp_unit(double x) {
  return x < kUnitClamp ? kUnitClamp : (x > 1.0 - kUnitClamp ? 1.0 - kUnitClamp : x);
}

}  // namespace vinedep::detail
