#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "llwlc/generators.hpp"
#include "llwlc/graph.hpp"

namespace llwlc {

/// Stable color-refinement partition. Color ids are canonical: each round the
/// distinct (own color, sorted neighbor colors) signatures are relabeled in
/// lexicographic order, so isomorphic graphs produce identical colorings.
struct ColorPartition {
  std::vector<int> colors; ///< node -> color id
  int rounds = 0;
  int num_classes = 0;

  std::map<int, int> histogram() const {
    std::map<int, int> h;
    for (int c : colors) ++h[c];
    return h;
  }
};

/// One-dimensional Weisfeiler-Leman color refinement from uniform initial
/// colors, iterated to stabilization.
inline ColorPartition wl1_refine(const Graph& g) {
  ColorPartition part;
  part.colors.assign(g.n, 0);
  part.num_classes = g.n > 0 ? 1 : 0;
  for (;;) {
    using Signature = std::pair<int, std::vector<int>>;
    std::vector<Signature> sig(g.n);
    for (int v = 0; v < g.n; ++v) {
      std::vector<int> nbr;
      nbr.reserve(g.adj[v].size());
      for (int u : g.adj[v]) nbr.push_back(part.colors[u]);
      std::sort(nbr.begin(), nbr.end());
      sig[v] = {part.colors[v], std::move(nbr)};
    }
    std::map<Signature, int> relabel;
    for (int v = 0; v < g.n; ++v) relabel.emplace(sig[v], 0);
    int next = 0;
    for (auto& [s, id] : relabel) id = next++;
    std::vector<int> fresh(g.n);
    for (int v = 0; v < g.n; ++v) fresh[v] = relabel.at(sig[v]);
    if (fresh == part.colors) break;
    part.colors = std::move(fresh);
    part.num_classes = next;
    ++part.rounds;
  }
  return part;
}

/// True iff 1-WL separates the two graphs. Refinement runs jointly on the
/// disjoint union so color ids are directly comparable, then the per-graph
/// color histograms are compared.
inline bool wl1_distinguish(const Graph& g1, const Graph& g2) {
  if (g1.n != g2.n) return true;
  const Graph both = disjoint_union(g1, g2);
  const ColorPartition part = wl1_refine(both);
  std::map<int, int> h1, h2;
  for (int v = 0; v < g1.n; ++v) ++h1[part.colors[v]];
  for (int v = 0; v < g2.n; ++v) ++h2[part.colors[g1.n + v]];
  return h1 != h2;
}

} // namespace llwlc
