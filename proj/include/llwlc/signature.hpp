#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "llwlc/constraint.hpp"
#include "llwlc/generators.hpp"
#include "llwlc/graph.hpp"
#include "llwlc/lanczos.hpp"
#include "llwlc/subgraph.hpp"

namespace llwlc {

/// Which family of constrained eigenproblems a signature is built from.
struct SignaturePolicy {
  enum Kind { NeumannPerEdge, VertexDeletedAll, VertexDeletedSample } kind =
      NeumannPerEdge;
  int sample_k = 0;      ///< VertexDeletedSample: vertices deleted per draw
  uint64_t seed = 0;     ///< VertexDeletedSample: base seed of the draws
  int sample_m = 0;      ///< VertexDeletedSample: number of deletion-set draws

  static SignaturePolicy neumann_per_edge() { return {NeumannPerEdge, 0, 0, 0}; }
  static SignaturePolicy vertex_deleted_all() { return {VertexDeletedAll, 0, 0, 0}; }
  static SignaturePolicy vertex_deleted_sample(int k, uint64_t seed, int m = 12) {
    return {VertexDeletedSample, k, seed, m};
  }
};

/// Relabeling-invariant spectral fingerprint: one sorted, τ-rounded Ritz
/// multiset per configuration element (edge or deleted vertex), the elements
/// themselves sorted lexicographically so no element order leaks in.
struct SpectralSignature {
  std::vector<std::string> element_ids;             ///< pre-sort labels, reordered with elements
  std::vector<std::vector<double>> elements;        ///< each ascending, rounded
  double tau = 1e-6;

  void canonicalize() {
    std::vector<int> order(elements.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (elements[a] != elements[b]) return elements[a] < elements[b];
      return element_ids[a] < element_ids[b];
    });
    std::vector<std::string> ids;
    std::vector<std::vector<double>> els;
    for (int i : order) {
      ids.push_back(std::move(element_ids[i]));
      els.push_back(std::move(elements[i]));
    }
    element_ids = std::move(ids);
    elements = std::move(els);
  }
};

namespace detail {

inline double round_to_grid(double x, double tau) {
  return std::round(x / tau) * tau;
}

/// Solves the constrained eigenproblem on g exhaustively (every feasible
/// direction) and returns the κ smallest Ritz values, rounded and sorted.
inline std::vector<double> rounded_spectrum(const Graph& g, const ConstraintMatrix& C,
                                            int kappa, double tau, uint64_t seed) {
  SolveOptions opts;
  opts.kappa_target = kappa;
  opts.exhaust = true;
  opts.deflate_restarts = true;
  opts.seed = seed;
  const ConstrainedEigenbasis eb = solve_eigenbasis(g, C, opts);
  std::vector<double> vals(eb.R.data(), eb.R.data() + eb.R.size());
  for (double& v : vals) v = round_to_grid(v, tau);
  std::sort(vals.begin(), vals.end());
  return vals;
}

} // namespace detail

/// Per-edge/per-vertex constrained spectra of a graph under the given policy.
/// NeumannPerEdge: for every edge, the two-hop enclosing subgraph is solved
/// under its Neumann boundary + degree-sum constraints (a constraint that is
/// structurally empty for an edge — e.g. no boundary shell — is skipped).
/// VertexDeletedAll: the full graph is solved once per vertex, under that
/// single vertex's deleted-degree constraint.
/// VertexDeletedSample: sample_m independent deletion *sets* of sample_k
/// vertices are drawn from `seed`; each element solves the full graph under
/// the jointly assembled deleted-degree columns of one whole set. Joint sets
/// matter: a single deleted-degree column lives in the span of {1, e_v,
/// A(:,v)}, so any spectrum it induces is a function of the graph's walk
/// algebra alone and cannot separate graphs that share it (e.g. strongly
/// regular pairs), whereas the columns of a set couple through the set's
/// induced adjacency pattern, which such pairs do not share.
inline SpectralSignature llwlc_signature(const Graph& g, const SignaturePolicy& policy,
                                         int kappa, double tau = 1e-6,
                                         uint64_t seed = 1) {
  SpectralSignature sig;
  sig.tau = tau;
  if (policy.kind == SignaturePolicy::NeumannPerEdge) {
    for (const auto& [u, v] : g.edges) {
      try {
        const EnclosingSubgraph sub = extract_enclosing_subgraph(g, u, v);
        std::vector<ConstraintColumn> cols;
        try {
          cols.push_back(neumann_boundary_column(sub));
        } catch (const EmptyConstraintError&) {}
        try {
          cols.push_back(degree_sum_column(sub, g));
        } catch (const EmptyConstraintError&) {}
        const ConstraintMatrix C = assemble(cols, sub.local.n);
        sig.element_ids.push_back("edge " + std::to_string(u) + "-" + std::to_string(v));
        sig.elements.push_back(
            detail::rounded_spectrum(sub.local, C, kappa, tau, seed));
      } catch (const Error& e) {
        throw NumericalError("signature failed at edge (" + std::to_string(u) + ", " +
                             std::to_string(v) + "): " + e.what());
      }
    }
  } else if (policy.kind == SignaturePolicy::VertexDeletedAll) {
    for (int v = 0; v < g.n; ++v) {
      try {
        const ConstraintMatrix C = assemble({vertex_deleted_column(g, v)}, g.n);
        sig.element_ids.push_back("vdel " + std::to_string(v));
        sig.elements.push_back(detail::rounded_spectrum(g, C, kappa, tau, seed));
      } catch (const Error& e) {
        throw NumericalError("signature failed at vertex " + std::to_string(v) + ": " +
                             e.what());
      }
    }
  } else {
    if (policy.sample_m < 1)
      throw ValidationError("sample policy needs at least one deletion-set draw");
    for (int t = 0; t < policy.sample_m; ++t) {
      std::vector<int> set = stochastic_select(
          g, std::min(policy.sample_k, g.n), mix_seed(policy.seed, 0xD0 + t));
      std::sort(set.begin(), set.end());
      std::string id = "vdel-set";
      for (std::size_t i = 0; i < set.size(); ++i)
        id += (i == 0 ? " " : ",") + std::to_string(set[i]);
      try {
        std::vector<ConstraintColumn> cols;
        for (int v : set) {
          try {
            cols.push_back(vertex_deleted_column(g, v));
          } catch (const EmptyConstraintError&) {}
        }
        const ConstraintMatrix C = assemble(cols, g.n);
        sig.element_ids.push_back(id);
        sig.elements.push_back(detail::rounded_spectrum(
            g, C, kappa, tau, mix_seed(seed, 0x5E7 + t)));
      } catch (const Error& e) {
        throw NumericalError("signature failed at deletion set '" + id + "': " + e.what());
      }
    }
  }
  sig.canonicalize();
  return sig;
}

/// L∞ distance between two signatures' flattened canonical forms; a shape
/// mismatch (different element count or multiset length) is +infinity.
inline double signature_gap(const SpectralSignature& a, const SpectralSignature& b) {
  if (a.elements.size() != b.elements.size())
    return std::numeric_limits<double>::infinity();
  double gap = 0.0;
  for (size_t i = 0; i < a.elements.size(); ++i) {
    if (a.elements[i].size() != b.elements[i].size())
      return std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < a.elements[i].size(); ++j)
      gap = std::max(gap, std::abs(a.elements[i][j] - b.elements[i][j]));
  }
  return gap;
}

inline bool signatures_distinguish(const SpectralSignature& a, const SpectralSignature& b,
                                   double threshold = 1e-6) {
  return signature_gap(a, b) > threshold;
}

/// Report block: one "element_id: v1 v2 ... vκ" line per element.
inline void write_signature(std::ostream& out, const SpectralSignature& sig) {
  char buf[64];
  for (size_t i = 0; i < sig.elements.size(); ++i) {
    out << sig.element_ids[i] << ":";
    for (double v : sig.elements[i]) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out << " " << buf;
    }
    out << "\n";
  }
}

inline void write_verdict(std::ostream& out, double gap, double threshold = 1e-6) {
  if (gap > threshold) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", gap);
    out << "DISTINGUISHED gap=" << buf << "\n";
  } else {
    out << "INDISTINGUISHABLE\n";
  }
}

/// Node-pair orbit experiment on a small vertex-transitive graph: computes the
/// Neumann-constrained spectrum of each pair's enclosing subgraph and checks
/// that same-orbit pairs agree while different orbits separate.
struct OrbitReport {
  struct Entry {
    std::string orbit;
    std::pair<int, int> pair;
    std::vector<double> values;
  };
  std::vector<Entry> entries;
  double max_within_orbit_gap = 0.0;
  double min_between_orbit_gap = std::numeric_limits<double>::infinity();
};

inline OrbitReport orbit_pair_experiment(
    const Graph& g,
    const std::vector<std::pair<std::string, std::pair<int, int>>>& labeled_pairs,
    int kappa, double tau = 1e-6, uint64_t seed = 1) {
  OrbitReport rep;
  for (const auto& [orbit, pr] : labeled_pairs) {
    const EnclosingSubgraph sub = extract_enclosing_subgraph(g, pr.first, pr.second);
    std::vector<ConstraintColumn> cols;
    try {
      cols.push_back(neumann_boundary_column(sub));
    } catch (const EmptyConstraintError&) {}
    try {
      cols.push_back(degree_sum_column(sub, g));
    } catch (const EmptyConstraintError&) {}
    const ConstraintMatrix C = assemble(cols, sub.local.n);
    rep.entries.push_back(
        {orbit, pr, detail::rounded_spectrum(sub.local, C, kappa, tau, seed)});
  }
  for (size_t i = 0; i < rep.entries.size(); ++i)
    for (size_t j = i + 1; j < rep.entries.size(); ++j) {
      double gap = 0.0;
      const auto& a = rep.entries[i].values;
      const auto& b = rep.entries[j].values;
      if (a.size() != b.size()) gap = std::numeric_limits<double>::infinity();
      else
        for (size_t t = 0; t < a.size(); ++t)
          gap = std::max(gap, std::abs(a[t] - b[t]));
      if (rep.entries[i].orbit == rep.entries[j].orbit)
        rep.max_within_orbit_gap = std::max(rep.max_within_orbit_gap, gap);
      else
        rep.min_between_orbit_gap = std::min(rep.min_between_orbit_gap, gap);
    }
  return rep;
}

/// The three node-pair orbits of the 6-cycle: adjacent, distance-2, antipodal.
inline OrbitReport c6_orbit_experiment(int kappa = 4, uint64_t seed = 1) {
  const Graph c6 = cycle_graph(6);
  return orbit_pair_experiment(c6,
                               {{"adjacent", {0, 1}},
                                {"adjacent", {2, 3}},
                                {"distance2", {0, 2}},
                                {"distance2", {2, 4}},
                                {"antipodal", {0, 3}},
                                {"antipodal", {1, 4}}},
                               kappa, 1e-6, seed);
}

} // namespace llwlc
