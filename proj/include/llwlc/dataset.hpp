#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "llwlc/constraint.hpp"
#include "llwlc/errors.hpp"
#include "llwlc/graph.hpp"
#include "llwlc/lanczos.hpp"
#include "llwlc/rng.hpp"
#include "llwlc/subgraph.hpp"

namespace llwlc {

enum class ConstraintPolicy { None, Neumann, VertexDeleted };

inline std::string policy_name(ConstraintPolicy p) {
  switch (p) {
    case ConstraintPolicy::None: return "none";
    case ConstraintPolicy::Neumann: return "neumann";
    case ConstraintPolicy::VertexDeleted: return "vdel";
  }
  return "?";
}

inline ConstraintPolicy parse_policy(const std::string& s) {
  if (s == "none") return ConstraintPolicy::None;
  if (s == "neumann") return ConstraintPolicy::Neumann;
  if (s == "vdel") return ConstraintPolicy::VertexDeleted;
  throw ValidationError("unknown constraint policy '" + s + "'");
}

/// One candidate link: its enclosing subgraph, the constrained eigenbasis of
/// that subgraph, initial node features, and the 0/1 label.
struct LinkInstance {
  int u = 0, v = 0; ///< endpoints in the parent graph
  int label = 0;
  EnclosingSubgraph sub;
  ConstrainedEigenbasis eb;
  Eigen::MatrixXd X0; ///< nodes × 5
};

/// Initial node features: query indicator, one-hot hop label (0/1/2), degree
/// of the node in the parent graph.
inline Eigen::MatrixXd initial_features(const EnclosingSubgraph& sub,
                                        const Graph& parent) {
  const int m = sub.local.n;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m, 5);
  for (int i = 0; i < m; ++i) {
    X(i, 0) = (i == sub.query_u || i == sub.query_v) ? 1.0 : 0.0;
    const int h = sub.hop[i];
    if (h >= 0 && h <= 2) X(i, 1 + h) = 1.0;
    X(i, 4) = parent.degree(sub.parent_index[i]);
  }
  return X;
}

/// Builds the per-instance constraint matrix for a policy. Structurally empty
/// columns (no boundary shell, isolated interior, ...) are skipped; if nothing
/// survives the solve simply runs unconstrained.
inline ConstraintMatrix instance_constraints(const EnclosingSubgraph& sub,
                                             const Graph& parent,
                                             ConstraintPolicy policy, int vdel_k,
                                             uint64_t vdel_seed) {
  std::vector<ConstraintColumn> cols;
  switch (policy) {
    case ConstraintPolicy::None:
      break;
    case ConstraintPolicy::Neumann: {
      try {
        cols.push_back(neumann_boundary_column(sub));
      } catch (const EmptyConstraintError&) {}
      try {
        cols.push_back(degree_sum_column(sub, parent));
      } catch (const EmptyConstraintError&) {}
      break;
    }
    case ConstraintPolicy::VertexDeleted: {
      const int k = std::min(vdel_k, sub.local.n);
      if (k >= 1) {
        for (int v : stochastic_select(sub.local, k, vdel_seed)) {
          try {
            cols.push_back(vertex_deleted_column(sub.local, v));
          } catch (const EmptyConstraintError&) {}
        }
      }
      break;
    }
  }
  return assemble(cols, sub.local.n);
}

/// (Re)computes an instance's eigenbasis; used at dataset build time and, for
/// the vertex-deleted policy, once per epoch with an epoch-derived seed.
inline void refresh_eigenbasis(LinkInstance& inst, const Graph& parent,
                               ConstraintPolicy policy, int kappa_target,
                               int vdel_k, uint64_t vdel_seed) {
  const ConstraintMatrix C =
      instance_constraints(inst.sub, parent, policy, vdel_k, vdel_seed);
  SolveOptions opts;
  opts.kappa_target = kappa_target;
  opts.steps = kappa_target;
  opts.deflate_restarts = true;
  opts.seed = mix_seed(vdel_seed, 0xE16);
  inst.eb = solve_eigenbasis(inst.sub.local, C, opts);
}

inline LinkInstance build_link_instance(const Graph& observed, int u, int v, int label,
                                        ConstraintPolicy policy, int kappa_target,
                                        int vdel_k, uint64_t seed) {
  LinkInstance inst;
  inst.u = u;
  inst.v = v;
  inst.label = label;
  inst.sub = extract_enclosing_subgraph(observed, u, v);
  inst.X0 = initial_features(inst.sub, observed);
  refresh_eigenbasis(inst, observed, policy, kappa_target, vdel_k, seed);
  return inst;
}

struct LinkDataset {
  Graph observed; ///< input graph minus held-out positive edges
  std::vector<LinkInstance> train;
  std::vector<LinkInstance> test;
};

struct DatasetConfig {
  double test_fraction = 0.1;
  uint64_t seed = 1;
  ConstraintPolicy policy = ConstraintPolicy::Neumann;
  int kappa_target = 10;
  int vdel_k = 10;
  int max_train_per_class = 0; ///< 0 = keep all
  int max_test_per_class = 0;  ///< 0 = keep all
};

/// Splits the graph's edges into train/test positives (the test fraction is
/// hidden from every subgraph extraction), samples an equal number of
/// distinct non-edges as negatives, and builds all link instances.
inline LinkDataset make_link_dataset(const Graph& g, const DatasetConfig& cfg) {
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
    throw ValidationError("test fraction must lie in (0, 1)");
  const int m = static_cast<int>(g.edges.size());
  const long long possible = static_cast<long long>(g.n) * (g.n - 1) / 2;
  if (possible - m < m)
    throw ValidationError("graph too dense to sample as many non-edges as edges");

  Rng rng(mix_seed(cfg.seed, 0xDA7A5E7ULL));
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  for (int i = m - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(static_cast<uint64_t>(i) + 1)]);

  int test_count = static_cast<int>(std::round(cfg.test_fraction * m));
  test_count = std::max(test_count, 1);
  const int train_count = m - test_count;
  if (train_count < 10 || test_count < 1)
    throw ValidationError("graph too small for the requested split: " +
                          std::to_string(train_count) + " train / " +
                          std::to_string(test_count) + " test positive edges");

  std::vector<std::pair<int, int>> test_pos, train_pos;
  for (int i = 0; i < m; ++i)
    (i < test_count ? test_pos : train_pos).push_back(g.edges[order[i]]);

  std::vector<std::pair<int, int>> observed_edges = train_pos;
  LinkDataset ds;
  ds.observed = make_graph(g.n, std::move(observed_edges));

  // Negatives: distinct uniform non-edges of the full input graph.
  std::set<std::pair<int, int>> chosen;
  std::vector<std::pair<int, int>> negatives;
  while (static_cast<int>(negatives.size()) < m) {
    int a = static_cast<int>(rng.below(g.n));
    int b = static_cast<int>(rng.below(g.n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (g.has_edge(a, b)) continue;
    if (!chosen.insert({a, b}).second) continue;
    negatives.push_back({a, b});
  }
  std::vector<std::pair<int, int>> train_neg(negatives.begin(),
                                             negatives.begin() + train_count);
  std::vector<std::pair<int, int>> test_neg(negatives.begin() + train_count,
                                            negatives.end());

  auto cap = [](std::vector<std::pair<int, int>>& v, int limit) {
    if (limit > 0 && static_cast<int>(v.size()) > limit) v.resize(limit);
  };
  cap(train_pos, cfg.max_train_per_class);
  cap(train_neg, cfg.max_train_per_class);
  cap(test_pos, cfg.max_test_per_class);
  cap(test_neg, cfg.max_test_per_class);

  uint64_t salt = 0;
  auto build_all = [&](const std::vector<std::pair<int, int>>& pairs, int label,
                       std::vector<LinkInstance>& out) {
    for (const auto& [a, b] : pairs)
      out.push_back(build_link_instance(ds.observed, a, b, label, cfg.policy,
                                        cfg.kappa_target, cfg.vdel_k,
                                        mix_seed(cfg.seed, 0xB11D + salt++)));
  };
  build_all(train_pos, 1, ds.train);
  build_all(train_neg, 0, ds.train);
  build_all(test_pos, 1, ds.test);
  build_all(test_neg, 0, ds.test);
  return ds;
}

} // namespace llwlc
