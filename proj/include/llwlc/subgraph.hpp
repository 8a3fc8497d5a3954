#pragma once

#include <algorithm>
#include <queue>
#include <utility>
#include <vector>

#include "llwlc/graph.hpp"

namespace llwlc {

/// Local neighborhood around a candidate link (u, v), cut out of a parent
/// graph by breadth-first search from both endpoints.
///
/// Local node order is canonical: index 0 is u, index 1 is v, then nodes at
/// hop 1, hop 2, ... each group sorted by parent index. With the default two
/// hops, hop-1 nodes form the interior shell `s_nodes` and hop-2 nodes the
/// boundary shell `boundary_nodes`.
struct EnclosingSubgraph {
  Graph local;                    ///< induced subgraph in local indices
  std::vector<int> parent_index;  ///< local -> parent node id
  std::vector<int> hop;           ///< local -> BFS distance from {u, v}
  int query_u = 0;                ///< local index of u (always 0)
  int query_v = 1;                ///< local index of v (always 1)
  std::vector<int> s_nodes;        ///< local indices at hop 1
  std::vector<int> boundary_nodes; ///< local indices at hop 2
};

/// Extracts the `num_hops`-hop enclosing subgraph of the pair (u, v).
/// When `remove_query_edge` is set (the default), the edge u-v is excluded
/// both from the BFS and from the extracted edge set, so hop distances and
/// spectra describe the graph as if the candidate link were unobserved.
inline EnclosingSubgraph extract_enclosing_subgraph(const Graph& g, int u, int v,
                                                    int num_hops = 2,
                                                    bool remove_query_edge = true) {
  if (u < 0 || u >= g.n || v < 0 || v >= g.n)
    throw ValidationError("query endpoint out of range");
  if (u == v) throw ValidationError("query endpoints must differ");
  if (num_hops < 1) throw ValidationError("hop count must be >= 1");

  auto blocked = [&](int a, int b) {
    return remove_query_edge &&
           ((a == u && b == v) || (a == v && b == u));
  };

  std::vector<int> dist(g.n, -1);
  std::queue<int> q;
  dist[u] = 0;
  dist[v] = 0;
  q.push(u);
  q.push(v);
  while (!q.empty()) {
    const int x = q.front();
    q.pop();
    if (dist[x] == num_hops) continue;
    for (int y : g.adj[x]) {
      if (blocked(x, y)) continue;
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
    }
  }

  EnclosingSubgraph sub;
  sub.parent_index = {u, v};
  sub.hop = {0, 0};
  for (int h = 1; h <= num_hops; ++h) {
    std::vector<int> shell;
    for (int x = 0; x < g.n; ++x)
      if (dist[x] == h) shell.push_back(x);
    // Nodes are scanned in parent order, so each shell is already sorted.
    for (int x : shell) {
      sub.parent_index.push_back(x);
      sub.hop.push_back(h);
    }
  }

  const int m = static_cast<int>(sub.parent_index.size());
  std::vector<int> local_of(g.n, -1);
  for (int i = 0; i < m; ++i) local_of[sub.parent_index[i]] = i;

  std::vector<std::pair<int, int>> local_edges;
  for (const auto& [a, b] : g.edges) {
    if (blocked(a, b)) continue;
    const int la = local_of[a], lb = local_of[b];
    if (la >= 0 && lb >= 0) local_edges.emplace_back(la, lb);
  }
  sub.local = make_graph(m, std::move(local_edges));

  for (int i = 0; i < m; ++i) {
    if (sub.hop[i] == 1) sub.s_nodes.push_back(i);
    if (sub.hop[i] == 2) sub.boundary_nodes.push_back(i);
  }
  return sub;
}

} // namespace llwlc
