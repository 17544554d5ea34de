#pragma once

#include <span>
#include <vector>

#include "vinedep/bicop.hpp"
#include "vinedep/common.hpp"

namespace vinedep {

struct EdgeFit {
  CopulaSpec spec;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
};

struct Candidate {
  Family family;
  Rotation rotation;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// sqrt(9N(N-1) / (2(2N+5))) * |tau|, approximately |N(0,1)| under independence.
double independence_statistic(double tau, std::size_t n);

/// True when independence is accepted (statistic below 2).
bool independence_test(double tau, std::size_t n);

/// Maximum-likelihood fit of a fixed family and rotation.
EdgeFit fit_bicop_mle(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v,
                      Family family, Rotation rotation);

/// Fits every candidate and keeps the smallest AIC (ties: fewer parameters,
/// then list order). Candidates whose fit throws are skipped.
EdgeFit select_family_aic(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v,
                          std::span<const Candidate> candidates);

/// Expands a family list into (family, rotation) candidates; rotations 0/180
/// are offered for positive empirical tau and 90/270 for negative tau.
std::vector<Candidate> default_candidates(double empirical_tau,
                                          std::span<const Family> families = kAllFamilies);

/// Log-likelihood of u,v under spec (sum of log densities).
double copula_loglik(const CopulaSpec& spec, const Eigen::Ref<const Vector>& u,
                     const Eigen::Ref<const Vector>& v);

}  // namespace vinedep
