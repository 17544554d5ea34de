#pragma once

#include <string>
#include <vector>

#include "vinedep/common.hpp"

namespace vinedep {

enum class TiePolicy { AverageRank };

/// Rescaled empirical distribution function F(x) = #{X_i <= x} / (N + 1).
/// At an observed value shared by several samples the average of the
/// tied ranks is used, so a PIT of the training sample is symmetric and
/// never touches 0 or 1.
class EmpiricalCDF {
 public:
  EmpiricalCDF() = default;

  double operator()(double x) const;

  const std::vector<double>& sorted_values() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  TiePolicy tie_policy() const { return TiePolicy::AverageRank; }

  friend EmpiricalCDF ecdf_fit(const Eigen::Ref<const Vector>& samples);

 private:
  std::vector<double> sorted_;
};

/// Needs at least 2 finite samples. A constant sample is accepted here;
/// the PIT functions reject it with DegenerateColumn.
EmpiricalCDF ecdf_fit(const Eigen::Ref<const Vector>& samples);

/// N x d copula data; every entry lies strictly inside (0, 1).
struct PseudoObservations {
  Matrix data;
  std::vector<std::string> names;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
};

/// Builds and checks a PseudoObservations value (N >= 2, d >= 2, entries in (0,1)).
/// Missing names are filled as V1..Vd.
PseudoObservations make_pseudo_observations(Matrix data, std::vector<std::string> names = {});

/// Column-wise probability integral transform through each column's own ECDF.
PseudoObservations pit_transform(const Matrix& raw, std::vector<std::string> names = {});

/// Rank-based PIT of a single column (ranks / (N + 1), ties averaged).
Vector pit_column(const Eigen::Ref<const Vector>& column);

/// Kolmogorov-Smirnov distance sup |F_emp(t) - t| against U(0,1).
double ks_uniform_statistic(const Eigen::Ref<const Vector>& u);

/// Asymptotic survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// Asymptotic KS p-value of u against the uniform distribution.
double ks_uniform_pvalue(const Eigen::Ref<const Vector>& u);

}  // namespace vinedep
