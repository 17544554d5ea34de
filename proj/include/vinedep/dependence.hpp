#pragma once

#include <string>
#include <vector>

#include "vinedep/common.hpp"
#include "vinedep/marginals.hpp"

namespace vinedep {

/// TauB corrects for ties; TauA divides by N(N-1)/2 regardless of ties.
enum class TauMode { TauA, TauB };

/// Pairwise concordance tallies for one pair of columns.
struct ConcordanceCounts {
  std::int64_t pairs = 0;        // N(N-1)/2
  std::int64_t tied_x = 0;       // pairs tied in x (including joint ties)
  std::int64_t tied_y = 0;       // pairs tied in y (including joint ties)
  std::int64_t tied_xy = 0;      // pairs tied in both
  std::int64_t discordant = 0;
  std::int64_t concordant() const { return pairs - tied_x - tied_y + tied_xy - discordant; }
};

/// O(N log N) tallies via sort + merge-sort inversion counting.
ConcordanceCounts concordance_counts(const Eigen::Ref<const Vector>& x,
                                     const Eigen::Ref<const Vector>& y);

/// Empirical Kendall tau. Returns 0 when either column is constant.
double kendall_tau(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                   TauMode mode = TauMode::TauB);

struct TauMatrix {
  Matrix values;
  std::vector<std::string> names;
};

TauMatrix tau_matrix(const PseudoObservations& u, TauMode mode = TauMode::TauB);

/// Same computation on an arbitrary real matrix (tau is rank based).
TauMatrix tau_matrix(const Matrix& data, std::vector<std::string> names,
                     TauMode mode = TauMode::TauB);

}  // namespace vinedep
