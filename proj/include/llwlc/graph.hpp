#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "llwlc/errors.hpp"

namespace llwlc {

/// Simple undirected graph. Immutable after construction: build through
/// make_graph / parse_edge_list / the generators and treat instances as const.
struct Graph {
  int n = 0;
  /// Canonical edge list: each pair (u, v) with u < v, sorted, no duplicates.
  std::vector<std::pair<int, int>> edges;
  /// Adjacency lists, each sorted ascending.
  std::vector<std::vector<int>> adj;
  /// Optional node features, one row per node.
  std::optional<Eigen::MatrixXd> features;

  int degree(int v) const { return static_cast<int>(adj[v].size()); }
  bool has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
  }
};

/// Validates and canonicalizes an edge set into a Graph. Reversed duplicates
/// collapse to one edge; self-loops are rejected.
inline Graph make_graph(int n, std::vector<std::pair<int, int>> edge_list,
                        std::optional<Eigen::MatrixXd> features = std::nullopt) {
  if (n < 0) throw ValidationError("node count must be >= 0");
  for (auto& [u, v] : edge_list) {
    if (u == v) throw ValidationError("self-loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ValidationError("edge endpoint out of range: (" + std::to_string(u) +
                            ", " + std::to_string(v) + ") with n=" + std::to_string(n));
    if (u > v) std::swap(u, v);
  }
  std::sort(edge_list.begin(), edge_list.end());
  edge_list.erase(std::unique(edge_list.begin(), edge_list.end()), edge_list.end());

  if (features && features->rows() != n)
    throw ValidationError("feature row count " + std::to_string(features->rows()) +
                          " does not match node count " + std::to_string(n));

  Graph g;
  g.n = n;
  g.edges = std::move(edge_list);
  g.adj.assign(n, {});
  for (const auto& [u, v] : g.edges) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
  g.features = std::move(features);
  return g;
}

/// Parses the line-oriented edge-list format: optional first line "# n=<count>",
/// comment lines starting with '#', otherwise "u v" per line.
inline Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::optional<int> header_n;
  std::vector<std::pair<int, int>> edge_list;
  int max_index = -1;

  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (lineno == 1) {
        // "# n=<count>" header is the one meaningful comment line.
        const auto pos = line.find("n=");
        if (pos != std::string::npos) {
          try {
            header_n = std::stoi(line.substr(pos + 2));
          } catch (const std::exception&) {
            throw ParseError("malformed node-count header", lineno);
          }
          if (*header_n < 0) throw ParseError("negative node count in header", lineno);
        }
      }
      continue;
    }
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u >> v))
      throw ParseError("expected two whitespace-separated integers", lineno);
    std::string trailing;
    if (ls >> trailing)
      throw ParseError("unexpected trailing token '" + trailing + "'", lineno);
    if (u < 0 || v < 0) throw ParseError("negative node index", lineno);
    if (u == v) throw ValidationError("self-loop at node " + std::to_string(u) +
                                      " (line " + std::to_string(lineno) + ")");
    edge_list.emplace_back(static_cast<int>(u), static_cast<int>(v));
    max_index = std::max(max_index, static_cast<int>(std::max(u, v)));
  }

  int n = header_n ? *header_n : max_index + 1;
  if (max_index >= n)
    throw ValidationError("edge index " + std::to_string(max_index) +
                          " exceeds declared node count " + std::to_string(n));
  return make_graph(n, std::move(edge_list));
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# n=" << g.n << "\n";
  for (const auto& [u, v] : g.edges) out << u << " " << v << "\n";
}

inline std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

/// Node-feature sidecar: whitespace-separated numeric matrix, one row per node.
inline Eigen::MatrixXd parse_feature_sidecar(const std::string& text, int n) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!ls.eof()) throw ParseError("malformed numeric token", lineno);
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("inconsistent column count", lineno);
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != n)
    throw ValidationError("feature sidecar has " + std::to_string(rows.size()) +
                          " rows for " + std::to_string(n) + " nodes");
  const int d = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rows[i][j];
  return m;
}

/// Combinatorial Laplacian L = D - A as a sparse symmetric matrix.
inline Eigen::SparseMatrix<double> laplacian(const Graph& g) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.edges.size() * 2 + g.n);
  for (int v = 0; v < g.n; ++v)
    trip.emplace_back(v, v, static_cast<double>(g.degree(v)));
  for (const auto& [u, v] : g.edges) {
    trip.emplace_back(u, v, -1.0);
    trip.emplace_back(v, u, -1.0);
  }
  Eigen::SparseMatrix<double> L(g.n, g.n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
  return Eigen::MatrixXd(laplacian(g));
}

/// Number of connected components by union-find over the edge list.
inline int connected_components(const Graph& g) {
  std::vector<int> parent(g.n);
  for (int i = 0; i < g.n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  int comps = g.n;
  for (const auto& [u, v] : g.edges) {
    const int ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[ru] = rv;
      --comps;
    }
  }
  return comps;
}

} // namespace llwlc
