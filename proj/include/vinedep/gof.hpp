#pragma once

#include <cstdint>
#include <vector>

#include "vinedep/common.hpp"
#include "vinedep/marginals.hpp"
#include "vinedep/rvine.hpp"

namespace vinedep {

struct InfoMatrices {
  Matrix hessian;        // second derivative of the log-likelihood
  Matrix outer_product;  // sum of per-observation score outer products
};

/// Finite-difference Hessian and score outer product at the vine's parameters.
/// Throws SingularCurvature when the Hessian is not negative semidefinite.
InfoMatrices info_matrices(const FittedVine& vine, const PseudoObservations& u);

/// Frobenius norm of vech(H/n + C/n).
double white_statistic(const InfoMatrices& m, std::size_t n);

struct WhiteTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_bootstrap = 0;  // replicates that completed
  std::size_t failed_replicates = 0;
  std::vector<double> per_replicate_stats;
};

/// Parametric-bootstrap White test with structure and families held fixed.
/// Requires n_bootstrap >= 20; throws TestUnreliable when 10% or more of the
/// replicates fail.
WhiteTestResult white_test(const FittedVine& vine, const PseudoObservations& u, std::size_t n_bootstrap,
                           std::uint64_t seed);

/// (1 + #{replicate >= observed}) / (B + 1).
double bootstrap_pvalue(double observed, const std::vector<double>& replicates);

}  // namespace vinedep
