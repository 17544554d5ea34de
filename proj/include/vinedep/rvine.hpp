#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vinedep/bicop.hpp"
#include "vinedep/common.hpp"
#include "vinedep/dependence.hpp"
#include "vinedep/marginals.hpp"
#include "vinedep/select.hpp"

namespace vinedep {

/// One edge of a vine tree: pair-copula for (a, b) given `conditioning`.
/// `a` is the copula's first argument. In tree 1, left == a and right == b
/// (variable indices); in higher trees they index the previous tree's edges,
/// with `left` the node whose conditioned set contains a.
struct VineEdge {
  int a = 0;
  int b = 0;
  std::vector<int> conditioning;
  int left = -1;
  int right = -1;

  /// {a, b} union conditioning, sorted.
  std::vector<int> full_set() const;
};

struct VineTree {
  int level = 1;
  std::vector<VineEdge> edges;

  std::size_t node_count() const { return edges.size() + 1; }
};

struct RVineStructure {
  int d = 0;
  std::vector<VineTree> trees;
};

/// Throws ProximityViolation / InvalidParameter when the three regular-vine
/// conditions (connected trees, nested node sets, proximity) fail.
void check_structure(const RVineStructure& structure);

/// Rebuilds left/right node links from conditioned/conditioning sets.
void link_structure(RVineStructure& structure);

/// Maximum spanning tree over |tau| (Kruskal, ties broken by index order).
VineTree select_first_tree(const TauMatrix& taus);

/// Every pair of previous-tree edges that shares a node, with the derived
/// conditioned pair and conditioning set.
std::vector<VineEdge> proximity_candidates(const VineTree& prev);

/// Next tree: maximum spanning tree over weight(candidate) among the
/// proximity-feasible candidates.
VineTree extend_tree(const VineTree& prev, const std::function<double(const VineEdge&)>& weight);

struct FittedVine {
  RVineStructure structure;
  std::vector<std::vector<EdgeFit>> edge_fits;  // [tree][edge]
  std::vector<std::vector<double>> edge_taus;
  std::vector<std::vector<TailDependence>> edge_tails;
  std::vector<std::string> names;
  double total_loglik = 0.0;
  std::size_t n_obs = 0;

  int dim() const { return structure.d; }
  std::size_t parameter_count() const;
};

struct VineFitConfig {
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  TauMode tau_mode = TauMode::TauB;
  /// Trees with level > truncation_level are forced to Independence (0 = off).
  int truncation_level = 0;
  bool independence_pretest = true;
  /// Coordinate-wise joint re-optimisation of all parameters after the
  /// sequential pass.
  bool joint_refinement = false;
};

/// Sequential (tree-by-tree) structure selection, family selection and fit.
FittedVine fit_sequential(const PseudoObservations& u, const VineFitConfig& config = {});

/// Builds a FittedVine from a structure and per-edge copulas (taus, tails and
/// edge log-likelihoods are filled; logliks are zero until scored on data).
FittedVine make_vine(RVineStructure structure, const std::vector<std::vector<CopulaSpec>>& specs,
                     std::vector<std::string> names = {});

/// Re-estimates every edge's parameters on u with structure and families held fixed.
FittedVine refit_parameters(const FittedVine& vine, const PseudoObservations& u);

/// Per-observation log vine density.
Vector vine_log_density_rows(const FittedVine& vine, const Matrix& u);
double vine_density(const FittedVine& vine, const Eigen::Ref<const Vector>& point);
double vine_loglik(const FittedVine& vine, const PseudoObservations& u);
double vine_loglik(const FittedVine& vine, const Matrix& u);

/// Inverse-Rosenblatt sampling along the vine.
PseudoObservations vine_simulate(const FittedVine& vine, Eigen::Index n, std::uint64_t seed);

using EdgeSpecs = std::vector<std::vector<CopulaSpec>>;

EdgeSpecs edge_specs(const FittedVine& vine);
Vector vine_log_density_rows(const RVineStructure& structure, const EdgeSpecs& specs, const Matrix& u);

/// Flattened parameters in tree-major, edge, parameter order.
Vector parameter_vector(const FittedVine& vine);
/// Writes a flattened parameter vector back into per-edge specs (validated).
EdgeSpecs specs_with_parameters(const EdgeSpecs& specs, const Eigen::Ref<const Vector>& params);
FittedVine with_parameters(const FittedVine& vine, const Eigen::Ref<const Vector>& params);

/// "(Views, Likes|Subs)" style label using names; `short_label` gives "13|2".
std::string edge_label(const VineEdge& edge, const std::vector<std::string>& names);
std::string short_label(const VineEdge& edge);

}  // namespace vinedep
