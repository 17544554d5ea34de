#include "vinedep/rvine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include <boost/math/tools/minima.hpp>

namespace vinedep {

std::vector<int> VineEdge::full_set() const {
  std::vector<int> s = conditioning;
  s.push_back(a);
  s.push_back(b);
  std::sort(s.begin(), s.end());
  return s;
}

std::size_t FittedVine::parameter_count() const {
  std::size_t p = 0;
  for (const auto& tree : edge_fits)
    for (const auto& f : tree) p += static_cast<std::size_t>(param_count(f.spec.family));
  return p;
}

std::string short_label(const VineEdge& edge) {
  std::string s = std::to_string(edge.a + 1) + std::to_string(edge.b + 1);
  if (!edge.conditioning.empty()) {
    s += "|";
    for (int c : edge.conditioning) s += std::to_string(c + 1);
  }
  return s;
}

std::string edge_label(const VineEdge& edge, const std::vector<std::string>& names) {
  auto name = [&](int i) {
    return i < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(i)] : "V" + std::to_string(i + 1);
  };
  std::string s = "(" + name(edge.a) + ", " + name(edge.b);
  if (!edge.conditioning.empty()) {
    s += "|";
    for (std::size_t k = 0; k < edge.conditioning.size(); ++k) {
      if (k) s += ",";
      s += name(edge.conditioning[k]);
    }
  }
  return s + ")";
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
};

// Endpoints of an edge as nodes of its own tree.
std::pair<int, int> endpoints(const VineEdge& e, int level) {
  if (level == 1) return {e.a, e.b};
  return {e.left, e.right};
}

// Indices into `candidates` forming a maximum spanning forest over `node_count` nodes.
template <class Edge>
std::vector<std::size_t> max_spanning(std::size_t node_count, const std::vector<Edge>& candidates,
                                      const std::vector<double>& weight,
                                      const std::function<std::pair<int, int>(const Edge&)>& ends) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return weight[x] > weight[y]; });
  DisjointSets sets(node_count);
  std::vector<std::size_t> chosen;
  for (std::size_t k : order) {
    const auto [p, q] = ends(candidates[k]);
    if (sets.unite(p, q)) chosen.push_back(k);
    if (chosen.size() + 1 == node_count) break;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

struct EdgeValues {
  Vector h_first;   // F(a | b, D)
  Vector h_second;  // F(b | a, D)
};

const Vector& node_value(const VineEdge& node, const EdgeValues& values, int variable) {
  return variable == node.a ? values.h_first : values.h_second;
}

std::pair<Vector, Vector> edge_inputs(const RVineStructure& s, std::size_t t, const VineEdge& e, const Matrix& u,
                                      const std::vector<std::vector<EdgeValues>>& values) {
  if (t == 0) return {u.col(e.a), u.col(e.b)};
  const auto& prev = s.trees[t - 1].edges;
  const auto l = static_cast<std::size_t>(e.left), r = static_cast<std::size_t>(e.right);
  return {node_value(prev[l], values[t - 1][l], e.a), node_value(prev[r], values[t - 1][r], e.b)};
}

EdgeValues edge_values(const CopulaSpec& spec, const Vector& uin, const Vector& vin) {
  if (spec.family == Family::Independence) return {uin, vin};
  return {hfunc(spec, uin, vin, HDirection::FirstGivenSecond), hfunc(spec, vin, uin, HDirection::SecondGivenFirst)};
}

struct Evaluation {
  Vector rows;
  std::vector<std::vector<double>> edge_loglik;
};

Evaluation evaluate(const RVineStructure& s, const EdgeSpecs& specs, const Matrix& u) {
  if (u.cols() != s.d) throw Error(ErrorCode::LengthMismatch, "data dimension does not match the vine");
  Evaluation ev;
  ev.rows = Vector::Zero(u.rows());
  std::vector<std::vector<EdgeValues>> values(s.trees.size());
  for (std::size_t t = 0; t < s.trees.size(); ++t) {
    const auto& edges = s.trees[t].edges;
    values[t].resize(edges.size());
    ev.edge_loglik.emplace_back(edges.size(), 0.0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const CopulaSpec& spec = specs[t][k];
      auto [uin, vin] = edge_inputs(s, t, edges[k], u, values);
      if (spec.family != Family::Independence) {
        const Vector ld = log_density(spec, uin, vin);
        ev.rows += ld;
        ev.edge_loglik[t][k] = ld.sum();
      }
      if (t + 1 < s.trees.size()) values[t][k] = edge_values(spec, uin, vin);
    }
  }
  return ev;
}

EdgeFit independence_fit() { return EdgeFit{CopulaSpec{Family::Independence, Rotation::R0, {}}, 0.0, 0.0, 0}; }

void fill_summaries(FittedVine& vine) {
  vine.edge_taus.assign(vine.edge_fits.size(), {});
  vine.edge_tails.assign(vine.edge_fits.size(), {});
  vine.total_loglik = 0.0;
  for (std::size_t t = 0; t < vine.edge_fits.size(); ++t) {
    for (const EdgeFit& f : vine.edge_fits[t]) {
      vine.edge_taus[t].push_back(theoretical_tau(f.spec));
      vine.edge_tails[t].push_back(tail_dependence(f.spec));
      vine.total_loglik += f.loglik;
    }
  }
}

std::vector<std::string> default_names(int d, std::vector<std::string> names) {
  if (names.empty())
    for (int j = 0; j < d; ++j) names.push_back("V" + std::to_string(j + 1));
  return names;
}

EdgeFit with_scores(EdgeFit f, double loglik) {
  f.loglik = loglik;
  f.n_params = param_count(f.spec.family);
  f.aic = 2.0 * f.n_params - 2.0 * loglik;
  return f;
}

}  // namespace

// ---------------------------------------------------------------- structure

void check_structure(const RVineStructure& s) {
  if (s.d < 2) throw Error(ErrorCode::InvalidParameter, "a vine needs at least 2 variables");
  if (static_cast<int>(s.trees.size()) != s.d - 1)
    throw Error(ErrorCode::InvalidParameter, "a vine on d variables has d-1 trees");
  for (std::size_t t = 0; t < s.trees.size(); ++t) {
    const VineTree& tree = s.trees[t];
    const int level = static_cast<int>(t) + 1;
    if (tree.level != level) throw Error(ErrorCode::InvalidParameter, "tree levels must be 1..d-1");
    const std::size_t nodes = t == 0 ? static_cast<std::size_t>(s.d) : s.trees[t - 1].edges.size();
    if (tree.edges.size() + 1 != nodes)
      throw Error(ErrorCode::InvalidParameter, "tree " + std::to_string(level) + " must have |nodes|-1 edges");
    DisjointSets sets(nodes);
    for (const VineEdge& e : tree.edges) {
      if (e.a == e.b || e.a < 0 || e.b < 0 || e.a >= s.d || e.b >= s.d)
        throw Error(ErrorCode::InvalidParameter, "edge has an invalid conditioned pair");
      if (static_cast<int>(e.full_set().size()) != level + 1 ||
          std::set<int>(e.conditioning.begin(), e.conditioning.end()).size() != e.conditioning.size())
        throw Error(ErrorCode::InvalidParameter, "edge " + short_label(e) + " has a malformed conditioning set");
      const auto [p, q] = endpoints(e, level);
      if (p < 0 || q < 0 || static_cast<std::size_t>(p) >= nodes || static_cast<std::size_t>(q) >= nodes)
        throw Error(ErrorCode::InvalidParameter, "edge " + short_label(e) + " references a missing node");
      if (!sets.unite(p, q)) throw Error(ErrorCode::InvalidParameter, "tree " + std::to_string(level) + " has a cycle");
      if (t > 0) {
        const auto& prev = s.trees[t - 1].edges;
        const VineEdge& l = prev[static_cast<std::size_t>(p)];
        const VineEdge& r = prev[static_cast<std::size_t>(q)];
        const auto [l1, l2] = endpoints(l, level - 1);
        const auto [r1, r2] = endpoints(r, level - 1);
        if (l1 != r1 && l1 != r2 && l2 != r1 && l2 != r2)
          throw Error(ErrorCode::ProximityViolation, "edge " + short_label(e) + " joins nodes that share no node");
        std::vector<int> fl = l.full_set(), fr = r.full_set(), inter, uni;
        std::set_intersection(fl.begin(), fl.end(), fr.begin(), fr.end(), std::back_inserter(inter));
        std::set_union(fl.begin(), fl.end(), fr.begin(), fr.end(), std::back_inserter(uni));
        if (inter != e.conditioning || uni != e.full_set() ||
            !std::binary_search(fl.begin(), fl.end(), e.a) || !std::binary_search(fr.begin(), fr.end(), e.b))
          throw Error(ErrorCode::ProximityViolation, "edge " + short_label(e) + " is inconsistent with its nodes");
      }
    }
  }
}

void link_structure(RVineStructure& s) {
  for (std::size_t t = 0; t < s.trees.size(); ++t) {
    for (VineEdge& e : s.trees[t].edges) {
      std::sort(e.conditioning.begin(), e.conditioning.end());
      if (t == 0) {
        e.left = e.a;
        e.right = e.b;
        continue;
      }
      auto with = [&](int x) {
        std::vector<int> s2 = e.conditioning;
        s2.push_back(x);
        std::sort(s2.begin(), s2.end());
        return s2;
      };
      const std::vector<int> want_left = with(e.a), want_right = with(e.b);
      e.left = e.right = -1;
      const auto& prev = s.trees[t - 1].edges;
      for (std::size_t k = 0; k < prev.size(); ++k) {
        const auto fs = prev[k].full_set();
        if (fs == want_left) e.left = static_cast<int>(k);
        if (fs == want_right) e.right = static_cast<int>(k);
      }
      if (e.left < 0 || e.right < 0)
        throw Error(ErrorCode::ProximityViolation, "edge " + short_label(e) + " has no matching parent nodes");
    }
  }
  check_structure(s);
}

VineTree select_first_tree(const TauMatrix& taus) {
  const auto d = static_cast<int>(taus.values.rows());
  if (d < 2) throw Error(ErrorCode::InputOutOfRange, "structure selection needs d >= 2");
  std::vector<VineEdge> candidates;
  std::vector<double> weight;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      candidates.push_back(VineEdge{i, j, {}, i, j});
      weight.push_back(std::abs(taus.values(i, j)));
    }
  const auto chosen = max_spanning<VineEdge>(static_cast<std::size_t>(d), candidates, weight,
                                             [](const VineEdge& e) { return std::make_pair(e.a, e.b); });
  VineTree tree{1, {}};
  for (std::size_t k : chosen) tree.edges.push_back(candidates[k]);
  return tree;
}

std::vector<VineEdge> proximity_candidates(const VineTree& prev) {
  std::vector<VineEdge> out;
  const auto& edges = prev.edges;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const auto [i1, i2] = endpoints(edges[i], prev.level);
      const auto [j1, j2] = endpoints(edges[j], prev.level);
      if (i1 != j1 && i1 != j2 && i2 != j1 && i2 != j2) continue;
      const auto fi = edges[i].full_set(), fj = edges[j].full_set();
      std::vector<int> only_i, only_j, shared;
      std::set_difference(fi.begin(), fi.end(), fj.begin(), fj.end(), std::back_inserter(only_i));
      std::set_difference(fj.begin(), fj.end(), fi.begin(), fi.end(), std::back_inserter(only_j));
      std::set_intersection(fi.begin(), fi.end(), fj.begin(), fj.end(), std::back_inserter(shared));
      if (only_i.size() != 1 || only_j.size() != 1)
        throw Error(ErrorCode::ProximityViolation, "adjacent nodes differ in more than one variable");
      out.push_back(VineEdge{only_i[0], only_j[0], shared, static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return out;
}

VineTree extend_tree(const VineTree& prev, const std::function<double(const VineEdge&)>& weight) {
  if (prev.edges.size() < 2) throw Error(ErrorCode::InputOutOfRange, "cannot extend a tree with fewer than 2 edges");
  const std::vector<VineEdge> candidates = proximity_candidates(prev);
  std::vector<double> w(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t k) { w[k] = weight(candidates[k]); });
  const auto chosen = max_spanning<VineEdge>(prev.edges.size(), candidates, w,
                                             [](const VineEdge& e) { return std::make_pair(e.left, e.right); });
  VineTree tree{prev.level + 1, {}};
  for (std::size_t k : chosen) tree.edges.push_back(candidates[k]);
  if (tree.edges.size() + 1 != prev.edges.size())
    throw Error(ErrorCode::ProximityViolation, "proximity-feasible edges do not span the previous tree");
  return tree;
}

// ---------------------------------------------------------------- fitting

FittedVine fit_sequential(const PseudoObservations& u, const VineFitConfig& config) {
  const auto d = static_cast<int>(u.cols());
  const auto n = static_cast<std::size_t>(u.rows());
  if (d < 2) throw Error(ErrorCode::InputOutOfRange, "vine fitting needs at least 2 columns");
  if (n < 30u * static_cast<std::size_t>(d))
    throw Error(ErrorCode::InputOutOfRange, "vine fitting needs at least 30*d observations");

  FittedVine vine;
  vine.names = default_names(d, u.names);
  vine.n_obs = n;
  vine.structure.d = d;

  std::vector<std::vector<EdgeValues>> values;
  VineTree tree = select_first_tree(tau_matrix(u, config.tau_mode));
  for (int level = 1; level < d; ++level) {
    const std::size_t t = static_cast<std::size_t>(level) - 1;
    if (level > 1) {
      const VineTree& prev = vine.structure.trees.back();
      tree = extend_tree(prev, [&](const VineEdge& cand) {
        const auto l = static_cast<std::size_t>(cand.left), r = static_cast<std::size_t>(cand.right);
        return std::abs(kendall_tau(node_value(prev.edges[l], values[t - 1][l], cand.a),
                                    node_value(prev.edges[r], values[t - 1][r], cand.b), config.tau_mode));
      });
    }
    vine.structure.trees.push_back(tree);
    const auto& edges = vine.structure.trees.back().edges;
    std::vector<EdgeFit> fits(edges.size());
    std::vector<EdgeValues> level_values(edges.size());
    parallel_for(edges.size(), [&](std::size_t k) {
      auto [uin, vin] = edge_inputs(vine.structure, t, edges[k], u.data, values);
      try {
        const double tau = kendall_tau(uin, vin, config.tau_mode);
        const bool truncated = config.truncation_level > 0 && level > config.truncation_level;
        if (truncated || (config.independence_pretest && independence_test(tau, n))) {
          fits[k] = independence_fit();
        } else {
          const auto candidates = default_candidates(tau, config.families);
          fits[k] = select_family_aic(uin, vin, candidates);
        }
      } catch (const Error& e) {
        throw Error(e.code(), "edge " + edge_label(edges[k], vine.names) + ": " + e.what());
      }
      if (level + 1 < d) level_values[k] = edge_values(fits[k].spec, uin, vin);
    });
    vine.edge_fits.push_back(std::move(fits));
    values.push_back(std::move(level_values));
  }
  fill_summaries(vine);

  if (config.joint_refinement && vine.parameter_count() > 0) {
    EdgeSpecs specs = edge_specs(vine);
    Vector theta = parameter_vector(vine);
    std::vector<std::pair<double, double>> box;
    for (const auto& tree_specs : specs)
      for (const auto& s : tree_specs) {
        const ParamBounds b = fit_bounds(s.family);
        for (std::size_t i = 0; i < b.lower.size(); ++i) box.emplace_back(b.lower[i], b.upper[i]);
      }
    auto objective = [&](const Vector& th) {
      try {
        const Vector rows = vine_log_density_rows(vine.structure, specs_with_parameters(specs, th), u.data);
        const double s = rows.sum();
        return std::isfinite(s) ? -s : 1e300;
      } catch (const Error&) {
        return 1e300;
      }
    };
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const auto [lo, hi] = box[static_cast<std::size_t>(k)];
        const double width = 0.1 * (hi - lo);
        Vector trial = theta;
        std::uintmax_t iterations = 100;
        const auto r = boost::math::tools::brent_find_minima(
            [&](double x) {
              trial[k] = x;
              return objective(trial);
            },
            std::max(lo, theta[k] - width), std::min(hi, theta[k] + width), 30, iterations);
        if (r.second < objective(theta)) theta[k] = r.first;
      }
    }
    const EdgeSpecs refined = specs_with_parameters(specs, theta);
    const Evaluation ev = evaluate(vine.structure, refined, u.data);
    for (std::size_t t = 0; t < refined.size(); ++t)
      for (std::size_t k = 0; k < refined[t].size(); ++k) {
        vine.edge_fits[t][k].spec = refined[t][k];
        vine.edge_fits[t][k] = with_scores(vine.edge_fits[t][k], ev.edge_loglik[t][k]);
      }
    fill_summaries(vine);
  }
  return vine;
}

FittedVine make_vine(RVineStructure structure, const EdgeSpecs& specs, std::vector<std::string> names) {
  link_structure(structure);
  if (specs.size() != structure.trees.size())
    throw Error(ErrorCode::InvalidParameter, "one copula list per tree is required");
  FittedVine vine;
  vine.names = default_names(structure.d, std::move(names));
  for (std::size_t t = 0; t < specs.size(); ++t) {
    if (specs[t].size() != structure.trees[t].edges.size())
      throw Error(ErrorCode::InvalidParameter, "one copula per edge is required");
    std::vector<EdgeFit> fits;
    for (const CopulaSpec& s : specs[t]) {
      validate(s);
      fits.push_back(with_scores(EdgeFit{s, 0.0, 0.0, 0}, 0.0));
    }
    vine.edge_fits.push_back(std::move(fits));
  }
  vine.structure = std::move(structure);
  fill_summaries(vine);
  return vine;
}

FittedVine refit_parameters(const FittedVine& vine, const PseudoObservations& u) {
  const RVineStructure& s = vine.structure;
  if (u.cols() != s.d) throw Error(ErrorCode::LengthMismatch, "data dimension does not match the vine");
  FittedVine out = vine;
  out.n_obs = static_cast<std::size_t>(u.rows());
  std::vector<std::vector<EdgeValues>> values(s.trees.size());
  for (std::size_t t = 0; t < s.trees.size(); ++t) {
    const auto& edges = s.trees[t].edges;
    values[t].resize(edges.size());
    parallel_for(edges.size(), [&](std::size_t k) {
      auto [uin, vin] = edge_inputs(s, t, edges[k], u.data, values);
      const CopulaSpec& old = vine.edge_fits[t][k].spec;
      EdgeFit fit = old.family == Family::Independence ? independence_fit()
                                                       : fit_bicop_mle(uin, vin, old.family, old.rotation);
      if (t + 1 < s.trees.size()) values[t][k] = edge_values(fit.spec, uin, vin);
      out.edge_fits[t][k] = std::move(fit);
    });
  }
  fill_summaries(out);
  return out;
}

// ---------------------------------------------------------------- evaluation

EdgeSpecs edge_specs(const FittedVine& vine) {
  EdgeSpecs specs;
  for (const auto& tree : vine.edge_fits) {
    specs.emplace_back();
    for (const auto& f : tree) specs.back().push_back(f.spec);
  }
  return specs;
}

Vector vine_log_density_rows(const RVineStructure& structure, const EdgeSpecs& specs, const Matrix& u) {
  return evaluate(structure, specs, u).rows;
}

Vector vine_log_density_rows(const FittedVine& vine, const Matrix& u) {
  return vine_log_density_rows(vine.structure, edge_specs(vine), u);
}

double vine_density(const FittedVine& vine, const Eigen::Ref<const Vector>& point) {
  if (point.size() != vine.dim()) throw Error(ErrorCode::LengthMismatch, "point dimension does not match the vine");
  const Matrix row = point.transpose();
  return std::exp(vine_log_density_rows(vine, row)[0]);
}

double vine_loglik(const FittedVine& vine, const Matrix& u) { return vine_log_density_rows(vine, u).sum(); }

double vine_loglik(const FittedVine& vine, const PseudoObservations& u) { return vine_loglik(vine, u.data); }

Vector parameter_vector(const FittedVine& vine) {
  std::vector<double> flat;
  for (const auto& tree : vine.edge_fits)
    for (const auto& f : tree) flat.insert(flat.end(), f.spec.params.begin(), f.spec.params.end());
  return Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

EdgeSpecs specs_with_parameters(const EdgeSpecs& specs, const Eigen::Ref<const Vector>& params) {
  EdgeSpecs out = specs;
  Eigen::Index pos = 0;
  for (auto& tree : out)
    for (auto& s : tree)
      for (double& p : s.params) {
        if (pos >= params.size()) throw Error(ErrorCode::LengthMismatch, "too few parameters for the vine");
        p = params[pos++];
      }
  if (pos != params.size()) throw Error(ErrorCode::LengthMismatch, "too many parameters for the vine");
  for (const auto& tree : out)
    for (const auto& s : tree) validate(s);
  return out;
}

FittedVine with_parameters(const FittedVine& vine, const Eigen::Ref<const Vector>& params) {
  const EdgeSpecs specs = specs_with_parameters(edge_specs(vine), params);
  FittedVine out = vine;
  for (std::size_t t = 0; t < specs.size(); ++t)
    for (std::size_t k = 0; k < specs[t].size(); ++k) out.edge_fits[t][k].spec = specs[t][k];
  fill_summaries(out);
  return out;
}

// ---------------------------------------------------------------- simulation

namespace {

struct EdgeRef {
  std::size_t tree;
  std::size_t index;
};

struct SamplingStep {
  int variable;
  std::vector<EdgeRef> column;  // tree 1 first
};

// Peels variables off the top tree: each chosen variable owns exactly one
// remaining edge per tree, which is what inverse-Rosenblatt sampling needs.
std::pair<std::vector<SamplingStep>, int> sampling_plan(const RVineStructure& s) {
  std::vector<std::vector<bool>> removed;
  for (const auto& tree : s.trees) removed.emplace_back(tree.edges.size(), false);
  std::vector<SamplingStep> steps;
  std::vector<bool> taken(static_cast<std::size_t>(s.d), false);
  const std::size_t trees = s.trees.size();
  for (std::size_t j = 0; j < trees; ++j) {
    const std::size_t top = trees - 1 - j;
    std::optional<std::size_t> top_edge;
    for (std::size_t k = 0; k < s.trees[top].edges.size(); ++k)
      if (!removed[top][k]) top_edge = k;
    if (!top_edge) throw Error(ErrorCode::ProximityViolation, "vine cannot be ordered for sampling");
    const int x = s.trees[top].edges[*top_edge].a;
    SamplingStep step{x, {}};
    for (std::size_t t = top + 1; t-- > 0;) {
      std::optional<std::size_t> hit;
      for (std::size_t k = 0; k < s.trees[t].edges.size(); ++k) {
        const VineEdge& e = s.trees[t].edges[k];
        if (removed[t][k] || (e.a != x && e.b != x)) continue;
        if (hit) throw Error(ErrorCode::ProximityViolation, "vine cannot be ordered for sampling");
        hit = k;
      }
      if (!hit) throw Error(ErrorCode::ProximityViolation, "vine cannot be ordered for sampling");
      removed[t][*hit] = true;
      step.column.push_back({t, *hit});
    }
    std::reverse(step.column.begin(), step.column.end());
    taken[static_cast<std::size_t>(x)] = true;
    steps.push_back(std::move(step));
  }
  const auto last = std::find(taken.begin(), taken.end(), false);
  return {std::move(steps), static_cast<int>(last - taken.begin())};
}

}  // namespace

PseudoObservations vine_simulate(const FittedVine& vine, Eigen::Index n, std::uint64_t seed) {
  const RVineStructure& s = vine.structure;
  if (n < 0) throw Error(ErrorCode::InputOutOfRange, "sample size must be non-negative");
  const auto d = static_cast<std::size_t>(s.d);
  const auto [steps, first] = sampling_plan(s);
  const EdgeSpecs specs = edge_specs(vine);

  // Independent uniforms, one column per variable, drawn row-major for a stable stream.
  Matrix w(n, s.d);
  UniformStream rng(seed);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < s.d; ++j) w(i, j) = rng.next();

  Matrix u(n, s.d);
  std::vector<bool> sampled(d, false);
  std::vector<std::vector<std::optional<EdgeValues>>> values;
  for (const auto& tree : s.trees) values.emplace_back(tree.edges.size());

  auto refresh = [&] {
    for (std::size_t t = 0; t < s.trees.size(); ++t) {
      for (std::size_t k = 0; k < s.trees[t].edges.size(); ++k) {
        if (values[t][k]) continue;
        const VineEdge& e = s.trees[t].edges[k];
        const auto fs = e.full_set();
        if (!std::all_of(fs.begin(), fs.end(), [&](int v) { return sampled[static_cast<std::size_t>(v)]; })) continue;
        Vector uin, vin;
        if (t == 0) {
          uin = u.col(e.a);
          vin = u.col(e.b);
        } else {
          const auto& prev = s.trees[t - 1].edges;
          uin = node_value(prev[static_cast<std::size_t>(e.left)], *values[t - 1][static_cast<std::size_t>(e.left)], e.a);
          vin = node_value(prev[static_cast<std::size_t>(e.right)], *values[t - 1][static_cast<std::size_t>(e.right)], e.b);
        }
        values[t][k] = edge_values(specs[t][k], uin, vin);
      }
    }
  };

  u.col(first) = w.col(0);
  sampled[static_cast<std::size_t>(first)] = true;
  refresh();
  Eigen::Index draw_col = 1;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const int x = it->variable;
    Vector cur = w.col(draw_col++);
    for (std::size_t c = it->column.size(); c-- > 0;) {
      const auto [t, k] = it->column[c];
      const VineEdge& e = s.trees[t].edges[k];
      const int other = e.a == x ? e.b : e.a;
      Vector cond;
      if (t == 0) {
        cond = u.col(other);
      } else {
        const std::size_t node = static_cast<std::size_t>(e.a == x ? e.right : e.left);
        cond = node_value(s.trees[t - 1].edges[node], *values[t - 1][node], other);
      }
      const HDirection dir = e.a == x ? HDirection::FirstGivenSecond : HDirection::SecondGivenFirst;
      const CopulaSpec& spec = specs[t][k];
      if (spec.family != Family::Independence) cur = hinv(spec, cur, cond, dir);
    }
    u.col(x) = cur;
    sampled[static_cast<std::size_t>(x)] = true;
    refresh();
  }
  PseudoObservations out;
  out.data = std::move(u);
  out.names = vine.names;
  return out;
}

}  // namespace vinedep
