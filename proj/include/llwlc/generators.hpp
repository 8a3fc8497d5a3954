#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "llwlc/graph.hpp"
#include "llwlc/rng.hpp"

namespace llwlc {

inline Graph cycle_graph(int n) {
  if (n < 3) throw ValidationError("cycle needs at least 3 nodes");
  std::vector<std::pair<int, int>> e;
  e.reserve(n);
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make_graph(n, std::move(e));
}

inline Graph path_graph(int n) {
  if (n < 1) throw ValidationError("path needs at least 1 node");
  std::vector<std::pair<int, int>> e;
  e.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, std::move(e));
}

inline Graph complete_graph(int n) {
  if (n < 1) throw ValidationError("complete graph needs at least 1 node");
  std::vector<std::pair<int, int>> e;
  e.reserve(n * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, std::move(e));
}

/// Star with center 0 and leaves 1..n-1.
inline Graph star_graph(int n) {
  if (n < 2) throw ValidationError("star needs at least 2 nodes");
  std::vector<std::pair<int, int>> e;
  e.reserve(n - 1);
  for (int i = 1; i < n; ++i) e.emplace_back(0, i);
  return make_graph(n, std::move(e));
}

/// 4x4 rook's graph: vertices are cells of a 4x4 grid, adjacent iff they share
/// a row or a column. Strongly regular with parameters (16, 6, 2, 2).
inline Graph rook4x4_graph() {
  const int side = 4;
  std::vector<std::pair<int, int>> e;
  auto id = [side](int r, int c) { return r * side + c; };
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      for (int c2 = c + 1; c2 < side; ++c2) e.emplace_back(id(r, c), id(r, c2));
      for (int r2 = r + 1; r2 < side; ++r2) e.emplace_back(id(r, c), id(r2, c));
    }
  return make_graph(side * side, std::move(e));
}

/// Shrikhande graph: Cayley graph on Z4 x Z4 with connection set
/// {±(1,0), ±(0,1), ±(1,1)}. Shares the SRG(16, 6, 2, 2) parameters with the
/// 4x4 rook's graph but is not isomorphic to it.
inline Graph shrikhande_graph() {
  const int side = 4;
  std::vector<std::pair<int, int>> e;
  auto id = [side](int r, int c) { return ((r % side + side) % side) * side +
                                          ((c % side + side) % side); };
  const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      for (const auto& d : dirs)
        e.emplace_back(id(r, c), id(r + d[0], c + d[1]));
  return make_graph(side * side, std::move(e));
}

inline Graph disjoint_union(const Graph& a, const Graph& b) {
  std::vector<std::pair<int, int>> e = a.edges;
  e.reserve(a.edges.size() + b.edges.size());
  for (const auto& [u, v] : b.edges) e.emplace_back(u + a.n, v + a.n);
  return make_graph(a.n + b.n, std::move(e));
}

/// G(n, p) with O(n + |E|) skip sampling over the upper-triangular pair order.
inline Graph erdos_renyi(int n, double p, uint64_t seed) {
  if (n < 0) throw ValidationError("node count must be >= 0");
  if (p < 0.0 || p > 1.0) throw ValidationError("edge probability must be in [0, 1]");
  std::vector<std::pair<int, int>> e;
  if (p > 0.0 && n > 1) {
    Rng rng(mix_seed(seed, 0x4752415048ULL));
    if (p >= 1.0) return complete_graph(n);
    const double log1mp = std::log1p(-p);
    // Walk the flattened pair index with geometric jumps.
    long long idx = -1;
    const long long total = static_cast<long long>(n) * (n - 1) / 2;
    while (true) {
      const double r = 1.0 - rng.unit(); // in (0, 1]
      const double skip = std::floor(std::log(r) / log1mp);
      if (skip > static_cast<double>(total)) break;
      idx += 1 + static_cast<long long>(skip);
      if (idx >= total) break;
      // Invert idx -> (u, v) with u < v: row u holds (n-1-u) pairs.
      long long rem = idx;
      int u = 0;
      long long row = n - 1;
      while (rem >= row) {
        rem -= row;
        --row;
        ++u;
      }
      const int v = u + 1 + static_cast<int>(rem);
      e.emplace_back(u, v);
    }
  }
  return make_graph(n, std::move(e));
}

/// Stochastic block model: blocks[i] nodes in block i, intra-block edge
/// probability p_in, inter-block probability p_out. Node ids run block by block.
inline Graph sbm(const std::vector<int>& blocks, double p_in, double p_out,
                 uint64_t seed) {
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1)
    throw ValidationError("block probabilities must be in [0, 1]");
  int n = 0;
  std::vector<int> block_of;
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b] < 0) throw ValidationError("block size must be >= 0");
    for (int i = 0; i < blocks[b]; ++i) block_of.push_back(static_cast<int>(b));
    n += blocks[b];
  }
  Rng rng(mix_seed(seed, 0x53424dULL));
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const double p = block_of[u] == block_of[v] ? p_in : p_out;
      if (rng.unit() < p) e.emplace_back(u, v);
    }
  return make_graph(n, std::move(e));
}

} // namespace llwlc
