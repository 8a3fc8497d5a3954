#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "llwlc/errors.hpp"
#include "llwlc/graph.hpp"
#include "llwlc/rng.hpp"
#include "llwlc/subgraph.hpp"

namespace llwlc {

enum class Provenance { NeumannBoundary, DegreeSum, VertexDeleted };

/// One homogeneous constraint cᵀf = 0, stored sparsely over local node indices.
struct ConstraintColumn {
  std::vector<std::pair<int, double>> entries; ///< (row, coefficient), rows ascending
  Provenance provenance = Provenance::NeumannBoundary;
  std::vector<int> deleted; ///< VertexDeleted only: which vertices were zeroed

  std::string provenance_string() const {
    switch (provenance) {
      case Provenance::NeumannBoundary: return "neumann-boundary";
      case Provenance::DegreeSum: return "degree-sum";
      case Provenance::VertexDeleted: {
        std::string s = "vertex-deleted";
        for (size_t i = 0; i < deleted.size(); ++i)
          s += (i == 0 ? " v=" : ",") + std::to_string(deleted[i]);
        return s;
      }
    }
    return "?";
  }

  Eigen::VectorXd dense(int n) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (const auto& [row, val] : entries) {
      if (row < 0 || row >= n)
        throw ValidationError("constraint row " + std::to_string(row) +
                              " out of range for n=" + std::to_string(n));
      c[row] = val;
    }
    return c;
  }
};

/// Sums the first Neumann side condition sum_{y in S, x in boundary, y~x}
/// (f(y) - f(x)) = 0 into a single column: each S-boundary cross edge adds +1
/// at its interior endpoint and -1 at its boundary endpoint, so nodes touched
/// by several cross edges accumulate counts.
inline ConstraintColumn neumann_boundary_column(const EnclosingSubgraph& sub) {
  std::vector<double> coeff(sub.local.n, 0.0);
  std::vector<char> in_s(sub.local.n, 0), in_b(sub.local.n, 0);
  for (int i : sub.s_nodes) in_s[i] = 1;
  for (int i : sub.boundary_nodes) in_b[i] = 1;
  int cross = 0;
  for (const auto& [a, b] : sub.local.edges) {
    int y = -1, x = -1;
    if (in_s[a] && in_b[b]) { y = a; x = b; }
    else if (in_s[b] && in_b[a]) { y = b; x = a; }
    else continue;
    coeff[y] += 1.0;
    coeff[x] -= 1.0;
    ++cross;
  }
  if (cross == 0)
    throw EmptyConstraintError("no cross edges between interior and boundary shells");
  ConstraintColumn col;
  col.provenance = Provenance::NeumannBoundary;
  for (int i = 0; i < sub.local.n; ++i)
    if (coeff[i] != 0.0) col.entries.emplace_back(i, coeff[i]);
  if (col.entries.empty())
    throw EmptyConstraintError("cross-edge counts cancelled to the zero column");
  return col;
}

/// Second Neumann side condition sum_{x in node_set} f(x) d_x = 0 with d_x the
/// node's degree in the parent graph. Defaults to node_set = S.
inline ConstraintColumn degree_sum_column(const EnclosingSubgraph& sub,
                                          const Graph& parent,
                                          std::vector<int> node_set = {}) {
  if (node_set.empty()) node_set = sub.s_nodes;
  if (node_set.empty())
    throw EmptyConstraintError("degree-sum node set is empty");
  ConstraintColumn col;
  col.provenance = Provenance::DegreeSum;
  std::set<int> seen;
  for (int i : node_set) {
    if (i < 0 || i >= sub.local.n)
      throw ValidationError("degree-sum node " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) continue;
    const double d = parent.degree(sub.parent_index[i]);
    if (d != 0.0) col.entries.emplace_back(i, d);
  }
  if (col.entries.empty())
    throw EmptyConstraintError("degree-sum node set has only isolated vertices");
  std::sort(col.entries.begin(), col.entries.end());
  return col;
}

/// Vertex-deleted subgraph constraint generalized to a set: surviving nodes
/// carry their original-graph degree, deleted nodes are zeroed (absent).
inline ConstraintColumn vertices_deleted_column(const Graph& g,
                                                const std::vector<int>& deleted) {
  std::vector<char> gone(g.n, 0);
  for (int v : deleted) {
    if (v < 0 || v >= g.n)
      throw ValidationError("deleted vertex " + std::to_string(v) + " out of range");
    gone[v] = 1;
  }
  ConstraintColumn col;
  col.provenance = Provenance::VertexDeleted;
  col.deleted = deleted;
  std::sort(col.deleted.begin(), col.deleted.end());
  col.deleted.erase(std::unique(col.deleted.begin(), col.deleted.end()),
                    col.deleted.end());
  for (int u = 0; u < g.n; ++u)
    if (!gone[u] && g.degree(u) > 0)
      col.entries.emplace_back(u, static_cast<double>(g.degree(u)));
  if (col.entries.empty())
    throw EmptyConstraintError("vertex deletion left no node with nonzero degree");
  return col;
}

inline ConstraintColumn vertex_deleted_column(const Graph& g, int v) {
  return vertices_deleted_column(g, {v});
}

/// Lifts a column expressed in subgraph-local indices into the parent graph's
/// index space (rows outside the subgraph stay zero).
inline ConstraintColumn embed_column(const ConstraintColumn& col,
                                     const std::vector<int>& parent_index,
                                     int n_parent) {
  ConstraintColumn out;
  out.provenance = col.provenance;
  for (int v : col.deleted) {
    if (v < 0 || v >= static_cast<int>(parent_index.size()))
      throw ValidationError("deleted vertex outside subgraph");
    out.deleted.push_back(parent_index[v]);
  }
  std::sort(out.deleted.begin(), out.deleted.end());
  for (const auto& [row, val] : col.entries) {
    if (row < 0 || row >= static_cast<int>(parent_index.size()))
      throw ValidationError("constraint row outside subgraph");
    const int parent_row = parent_index[row];
    if (parent_row < 0 || parent_row >= n_parent)
      throw ValidationError("parent index out of range");
    out.entries.emplace_back(parent_row, val);
  }
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

/// k distinct vertices, uniform without replacement, deterministic in the seed.
inline std::vector<int> stochastic_select(const Graph& g, int k, uint64_t seed) {
  if (k < 1 || k > g.n)
    throw ValidationError("sample size " + std::to_string(k) +
                          " outside [1, " + std::to_string(g.n) + "]");
  Rng rng(mix_seed(seed, 0x53454c454354ULL));
  return rng.sample_without_replacement(g.n, k);
}

struct ConstraintMatrix {
  int n = 0;
  std::vector<ConstraintColumn> columns;

  int l() const { return static_cast<int>(columns.size()); }
  bool empty() const { return columns.empty(); }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd C(n, l());
    for (int j = 0; j < l(); ++j) C.col(j) = columns[j].dense(n);
    return C;
  }

  Eigen::SparseMatrix<double> sparse() const {
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < l(); ++j)
      for (const auto& [row, val] : columns[j].entries)
        trip.emplace_back(row, j, val);
    Eigen::SparseMatrix<double> C(n, l());
    C.setFromTriplets(trip.begin(), trip.end());
    return C;
  }
};

struct AssemblyReport {
  std::vector<int> kept;    ///< input indices retained, in order
  std::vector<int> dropped; ///< input indices pruned as numerically dependent
};

/// Orders the columns as given and greedily drops any column that fails to
/// increase the numerical rank (rank-revealing pivoted QR, relative tolerance
/// τ_rank). An all-dropped input yields an empty matrix, which downstream
/// solvers treat as "no constraints".
inline ConstraintMatrix assemble(const std::vector<ConstraintColumn>& columns, int n,
                                 double tau_rank = 1e-10,
                                 AssemblyReport* report = nullptr) {
  if (static_cast<int>(columns.size()) > n)
    throw ValidationError("more constraint columns than rows");
  ConstraintMatrix out;
  out.n = n;
  AssemblyReport local_report;
  Eigen::MatrixXd kept(n, 0);
  for (size_t j = 0; j < columns.size(); ++j) {
    Eigen::MatrixXd trial(n, kept.cols() + 1);
    trial.leftCols(kept.cols()) = kept;
    trial.col(kept.cols()) = columns[j].dense(n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
    qr.setThreshold(tau_rank);
    if (qr.rank() == trial.cols()) {
      kept = std::move(trial);
      out.columns.push_back(columns[j]);
      local_report.kept.push_back(static_cast<int>(j));
    } else {
      local_report.dropped.push_back(static_cast<int>(j));
    }
  }
  if (report) *report = std::move(local_report);
  return out;
}

/// Dump format: header "n l", one line per nonzero "col row value", then
/// provenance appendix lines "# col <i> <provenance>".
inline void write_constraints(std::ostream& out, const ConstraintMatrix& C) {
  out << C.n << " " << C.l() << "\n";
  char buf[64];
  for (int j = 0; j < C.l(); ++j)
    for (const auto& [row, val] : C.columns[j].entries) {
      std::snprintf(buf, sizeof buf, "%.17g", val);
      out << j << " " << row << " " << buf << "\n";
    }
  for (int j = 0; j < C.l(); ++j)
    out << "# col " << j << " " << C.columns[j].provenance_string() << "\n";
}

inline ConstraintMatrix parse_constraints(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  ConstraintMatrix C;
  int l = -1;
  std::vector<std::vector<std::pair<int, double>>> entries;
  std::vector<std::string> prov;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ls(line);
      std::string hash, word;
      int j;
      if (ls >> hash >> word >> j && word == "col") {
        std::string p;
        std::getline(ls, p);
        const auto start = p.find_first_not_of(" \t");
        if (start != std::string::npos && j >= 0 && j < static_cast<int>(prov.size()))
          prov[j] = p.substr(start);
      }
      continue;
    }
    std::istringstream ls(line);
    if (l < 0) {
      if (!(ls >> C.n >> l) || C.n < 0 || l < 0)
        throw ParseError("expected header 'n l'", lineno);
      entries.resize(l);
      prov.assign(l, "neumann-boundary");
      continue;
    }
    int j, row;
    double val;
    if (!(ls >> j >> row >> val))
      throw ParseError("expected 'col row value'", lineno);
    if (j < 0 || j >= l) throw ParseError("column index out of range", lineno);
    if (row < 0 || row >= C.n) throw ParseError("row index out of range", lineno);
    entries[j].emplace_back(row, val);
  }
  if (l < 0) throw ParseError("missing constraint header", 1);
  for (int j = 0; j < l; ++j) {
    ConstraintColumn col;
    col.entries = std::move(entries[j]);
    std::sort(col.entries.begin(), col.entries.end());
    if (col.entries.empty())
      throw ValidationError("column " + std::to_string(j) + " has no entries");
    if (prov[j].rfind("degree-sum", 0) == 0) col.provenance = Provenance::DegreeSum;
    else if (prov[j].rfind("vertex-deleted", 0) == 0) {
      col.provenance = Provenance::VertexDeleted;
      const auto pos = prov[j].find("v=");
      if (pos != std::string::npos) {
        std::string ids = prov[j].substr(pos + 2);
        for (auto& ch : ids) if (ch == ',') ch = ' ';
        std::istringstream vs(ids);
        int v;
        while (vs >> v) col.deleted.push_back(v);
      }
    } else col.provenance = Provenance::NeumannBoundary;
    C.columns.push_back(std::move(col));
  }
  return C;
}

} // namespace llwlc
