#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vinedep/common.hpp"

namespace vinedep {

enum class Family { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe, BB7, BB8, Tawn1 };

inline constexpr std::array<Family, 10> kAllFamilies{
    Family::Independence, Family::Gaussian, Family::StudentT, Family::Clayton, Family::Gumbel,
    Family::Frank,        Family::Joe,      Family::BB7,      Family::BB8,     Family::Tawn1};

/// Counter-clockwise rotation of the copula density; 180 is the survival copula.
enum class Rotation : int { R0 = 0, R90 = 90, R180 = 180, R270 = 270 };

/// FirstGivenSecond evaluates F(u | v) = dC(u,v)/dv;
/// SecondGivenFirst evaluates F(v | u) = dC(u,v)/du.
enum class HDirection { FirstGivenSecond, SecondGivenFirst };

struct CopulaSpec {
  Family family = Family::Independence;
  Rotation rotation = Rotation::R0;
  std::vector<double> params;

  friend bool operator==(const CopulaSpec&, const CopulaSpec&) = default;
};

struct TailDependence {
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
};

/// Admissible box used when fitting; the analytic domain may be wider.
struct ParamBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Inputs are clamped to [kUnitClamp, 1 - kUnitClamp] before evaluation.
inline constexpr double kUnitClamp = 1e-10;

int param_count(Family family);
bool is_exchangeable(Family family);
bool is_rotatable(Family family);
std::string_view family_name(Family family);
Family family_from_name(std::string_view name);
Rotation rotation_from_degrees(int degrees);
/// Table-style label: "Joe", "S-Joe" (180), "Joe-90", "Joe-270".
std::string display_name(const CopulaSpec& spec);

bool is_valid(const CopulaSpec& spec);
/// Throws Error(InvalidParameter) describing the violated constraint.
void validate(const CopulaSpec& spec);
ParamBounds fit_bounds(Family family);

double cdf(const CopulaSpec& spec, double u, double v);
double density(const CopulaSpec& spec, double u, double v);
double log_density(const CopulaSpec& spec, double u, double v);
double hfunc(const CopulaSpec& spec, double u, double cond, HDirection direction);
double hinv(const CopulaSpec& spec, double p, double cond, HDirection direction);

// Column versions; specs are validated once per call.
Vector log_density(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
                   const Eigen::Ref<const Vector>& v);
Vector hfunc(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
             const Eigen::Ref<const Vector>& cond, HDirection direction);
Vector hinv(const CopulaSpec& spec, const Eigen::Ref<const Vector>& p,
            const Eigen::Ref<const Vector>& cond, HDirection direction);

/// n x 2 sample by conditional inversion: u = w1, v = hinv(w2 | u).
Matrix sample(const CopulaSpec& spec, Eigen::Index n, std::uint64_t seed);

double theoretical_tau(const CopulaSpec& spec);
TailDependence tail_dependence(const CopulaSpec& spec);

/// One-parameter tau inversion (Clayton, Gumbel, Frank, Gaussian). For 90/270
/// rotations tau must be negative and the stored parameter stays positive.
CopulaSpec param_from_tau(Family family, double tau, Rotation rotation = Rotation::R0);

/// Debye function of order one, D1(x) = x^-1 * int_0^x t / (e^t - 1) dt.
double debye1(double x);

}  // namespace vinedep
