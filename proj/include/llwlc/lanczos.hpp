#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "llwlc/errors.hpp"
#include "llwlc/graph.hpp"
#include "llwlc/projector.hpp"
#include "llwlc/rng.hpp"

namespace llwlc {

/// The symmetric tridiagonal matrix accumulated by the Lanczos recurrence:
/// diagonal alphas[0..j-1], off-diagonal betas[0..j-2]. A zero beta marks a
/// deflation-restart boundary (the matrix splits into independent blocks).
struct TridiagonalMatrix {
  std::vector<double> alphas;
  std::vector<double> betas;

  int steps() const { return static_cast<int>(alphas.size()); }

  Eigen::MatrixXd dense() const {
    const int j = steps();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(j, j);
    for (int i = 0; i < j; ++i) T(i, i) = alphas[i];
    for (int i = 0; i + 1 < j; ++i) T(i, i + 1) = T(i + 1, i) = betas[i];
    return T;
  }
};

struct LanczosResult {
  Eigen::MatrixXd Q; ///< n×j, orthonormal columns inside the feasible space
  TridiagonalMatrix T;
};

struct LanczosOptions {
  int kappa = 10;              ///< requested outer steps
  double eps = -1.0;           ///< breakdown tolerance; < 0 → 1e-10·‖L‖₁
  uint64_t seed = 1;           ///< start-vector retries and restart vectors
  bool deflate_restarts = false; ///< continue in a fresh direction after breakdown
  int max_start_attempts = 5;
};

namespace detail {

inline Eigen::VectorXd random_unit_vector(int n, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  const double norm = v.norm();
  if (norm == 0.0) { v.setZero(); v[0] = 1.0; return v; }
  return v / norm;
}

/// Two passes of modified Gram–Schmidt against the first j columns of Q.
inline void reorthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& Q, int j) {
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < j; ++i) w -= w.dot(Q.col(i)) * Q.col(i);
}

template <class Mat>
double l1_operator_norm(const Mat& L) {
  double best = 0.0;
  for (int j = 0; j < L.cols(); ++j) {
    double s = 0.0;
    for (typename Mat::InnerIterator it(L, j); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

inline double l1_operator_norm(const Eigen::MatrixXd& L) {
  return L.cwiseAbs().colwise().sum().maxCoeff();
}

} // namespace detail

/// Projected Lanczos recurrence. Each step applies the operator, projects back
/// into the feasible space, and fully reorthogonalizes against every previous
/// basis vector (two modified Gram–Schmidt sweeps), so the accumulated columns
/// stay orthonormal and constraint-feasible to machine precision.
///
/// On breakdown (β ≤ ε) the plain mode quits with the completed steps. With
/// deflate_restarts the recurrence instead continues from a fresh random
/// feasible direction orthogonal to everything found so far, recording β = 0 —
/// this recovers full spectra in the presence of eigenvalue multiplicities and
/// disconnected feasible subspaces, at the price of a block-tridiagonal T.
template <class Mat>
LanczosResult constrained_lanczos(const Mat& L, const Projector& P,
                                  Eigen::VectorXd nu, const LanczosOptions& opts = {}) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n) throw ValidationError("operator must be square");
  if (!P.is_identity() && P.rows() != n)
    throw ValidationError("projector size does not match operator");
  if (nu.size() != n) throw ValidationError("start vector size mismatch");
  if (opts.kappa < 1) throw ValidationError("step count must be >= 1");

  const double eps =
      opts.eps > 0 ? opts.eps : 1e-10 * std::max(detail::l1_operator_norm(L), 1.0);
  const int feasible_dim = n - P.l();
  const int max_steps = std::min(opts.kappa, feasible_dim);

  LanczosResult res;
  if (max_steps < 1) { res.Q.resize(n, 0); return res; }

  Eigen::VectorXd v = P.apply(nu);
  for (int attempt = 1; v.norm() <= eps; ++attempt) {
    if (attempt > opts.max_start_attempts)
      throw NumericalError("start vector collapses into the constraint space after " +
                           std::to_string(opts.max_start_attempts) + " attempts");
    v = P.apply(detail::random_unit_vector(n, mix_seed(opts.seed, 0xA0 + attempt)));
  }

  Eigen::MatrixXd Q(n, max_steps);
  std::vector<double>& alphas = res.T.alphas;
  std::vector<double>& betas = res.T.betas;
  Q.col(0) = v / v.norm();

  int restarts = 0;
  int j = 0;
  for (;;) {
    const Eigen::VectorXd p = P.apply(L * Q.col(j));
    Eigen::VectorXd u = p;
    if (j > 0 && betas[j - 1] != 0.0) u -= betas[j - 1] * Q.col(j - 1);
    const double alpha = u.dot(Q.col(j));
    Eigen::VectorXd w = u - alpha * Q.col(j);
    detail::reorthogonalize(w, Q, j + 1);
    // Re-project before normalizing: when ‖w‖ is near breakdown, dividing by β
    // would otherwise amplify the infeasible roundoff left by the arithmetic
    // above. The correction is itself near-orthogonal to the feasible block,
    // so the Gram–Schmidt result is preserved.
    w = P.apply(w);
    alphas.push_back(alpha);

    if (j + 1 == max_steps) break;

    const double beta = w.norm();
    if (beta > eps) {
      betas.push_back(beta);
      Q.col(j + 1) = w / beta;
      ++j;
      continue;
    }
    if (!opts.deflate_restarts) break;

    // Deflation restart: find a fresh feasible direction orthogonal to the
    // converged block and continue with a decoupled recurrence (β = 0).
    bool found = false;
    for (int t = 0; t < 64 && !found; ++t) {
      Eigen::VectorXd r = P.apply(detail::random_unit_vector(
          n, mix_seed(opts.seed, 0x1000 + 64ULL * restarts + t)));
      detail::reorthogonalize(r, Q, j + 1);
      const double rn = r.norm();
      if (rn > 1e-8) {
        r /= rn;
        r = P.apply(r); // clean up once more after normalization
        detail::reorthogonalize(r, Q, j + 1);
        if (r.norm() > 0.5) {
          Q.col(j + 1) = r / r.norm();
          betas.push_back(0.0);
          found = true;
        }
      }
    }
    ++restarts;
    if (!found) break; // feasible space numerically exhausted
    ++j;
  }

  const int completed = static_cast<int>(alphas.size());
  res.Q = Q.leftCols(completed);
  res.T.betas.resize(std::max(completed - 1, 0));
  return res;
}

/// Convenience overload: deterministic random start vector from opts.seed.
template <class Mat>
LanczosResult constrained_lanczos(const Mat& L, const Projector& P,
                                  const LanczosOptions& opts = {}) {
  return constrained_lanczos(
      L, P, detail::random_unit_vector(static_cast<int>(L.rows()), mix_seed(opts.seed, 0x57)),
      opts);
}

struct TridiagonalEvd {
  Eigen::MatrixXd B;  ///< j×j orthonormal eigenvectors
  Eigen::VectorXd R;  ///< eigenvalues ascending
};

inline TridiagonalEvd tridiagonal_evd(const TridiagonalMatrix& T) {
  const int j = T.steps();
  if (j < 1) throw ValidationError("empty tridiagonal matrix");
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(T.alphas.data(), j);
  Eigen::VectorXd sub = j > 1
      ? Eigen::Map<const Eigen::VectorXd>(T.betas.data(), j - 1)
      : Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw NumericalError("tridiagonal eigendecomposition failed to converge");
  return {es.eigenvectors(), es.eigenvalues()};
}

/// Constrained eigenbasis: Ritz vectors V = Q·B and Ritz values R, truncated
/// to the κ_target smallest pairs or zero-padded up to κ_target when fewer
/// steps completed.
struct ConstrainedEigenbasis {
  Eigen::MatrixXd V;      ///< n×κ_target
  Eigen::VectorXd R;      ///< κ_target, ascending over the effective prefix
  int kappa_effective = 0;

  struct Diagnostics {
    std::vector<double> residuals; ///< ‖P(L v_i) − R_i v_i‖₂ per effective pair
    double max_constraint_violation = 0.0; ///< max |CᵀV|
    double max_orthogonality_loss = 0.0;   ///< max |VᵀV − I| over effective block
  } diagnostics;
};

template <class Mat>
ConstrainedEigenbasis make_eigenbasis(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& B,
                                      const Eigen::VectorXd& R, int kappa_target,
                                      const Mat& L, const Projector& P) {
  if (kappa_target < 1) throw ValidationError("kappa_target must be >= 1");
  if (Q.cols() != B.rows() || B.rows() != B.cols() || B.cols() != R.size())
    throw ValidationError("inconsistent eigenbasis shapes");
  const int n = static_cast<int>(Q.rows());
  const int j = static_cast<int>(B.cols());
  const int keff = std::min(j, kappa_target);

  ConstrainedEigenbasis eb;
  eb.V = Eigen::MatrixXd::Zero(n, kappa_target);
  eb.R = Eigen::VectorXd::Zero(kappa_target);
  // R is ascending, so the smallest κ_target pairs are the leading columns.
  eb.V.leftCols(keff) = Q * B.leftCols(keff);
  eb.R.head(keff) = R.head(keff);
  eb.kappa_effective = keff;

  eb.diagnostics.residuals.reserve(keff);
  for (int i = 0; i < keff; ++i) {
    const Eigen::VectorXd lv = P.apply(L * eb.V.col(i));
    eb.diagnostics.residuals.push_back((lv - eb.R[i] * eb.V.col(i)).norm());
  }
  if (!P.is_identity() && keff > 0) {
    eb.diagnostics.max_constraint_violation =
        (P.constraint_matrix().transpose() * eb.V.leftCols(keff))
            .cwiseAbs().maxCoeff();
  }
  if (keff > 0) {
    const Eigen::MatrixXd G = eb.V.leftCols(keff).transpose() * eb.V.leftCols(keff);
    eb.diagnostics.max_orthogonality_loss =
        (G - Eigen::MatrixXd::Identity(keff, keff)).cwiseAbs().maxCoeff();
  }
  return eb;
}

struct SolveOptions {
  int kappa_target = 10;   ///< eigenpairs in the output basis (pad/truncate)
  int steps = -1;          ///< Lanczos steps; -1 → kappa_target
  bool exhaust = false;    ///< run steps up to the feasible-space dimension
  double eps = -1.0;
  uint64_t seed = 1;
  bool deflate_restarts = true;
};

/// End-to-end constrained eigensolve: project, iterate, eigendecompose the
/// tridiagonal matrix, assemble the (possibly padded) eigenbasis.
template <class Mat>
ConstrainedEigenbasis solve_eigenbasis(const Mat& L, const ConstraintMatrix& C,
                                       const SolveOptions& opts = {}) {
  const int n = static_cast<int>(L.rows());
  Projector P(C);
  const int feasible_dim = n - P.l();
  LanczosOptions lopts;
  lopts.kappa = opts.exhaust ? feasible_dim
                             : (opts.steps > 0 ? opts.steps : opts.kappa_target);
  lopts.eps = opts.eps;
  lopts.seed = opts.seed;
  lopts.deflate_restarts = opts.deflate_restarts;

  if (feasible_dim < 1 || lopts.kappa < 1) {
    ConstrainedEigenbasis eb;
    eb.V = Eigen::MatrixXd::Zero(n, opts.kappa_target);
    eb.R = Eigen::VectorXd::Zero(opts.kappa_target);
    eb.kappa_effective = 0;
    return eb;
  }
  const LanczosResult lr = constrained_lanczos(L, P, lopts);
  if (lr.T.steps() == 0) {
    ConstrainedEigenbasis eb;
    eb.V = Eigen::MatrixXd::Zero(n, opts.kappa_target);
    eb.R = Eigen::VectorXd::Zero(opts.kappa_target);
    eb.kappa_effective = 0;
    return eb;
  }
  const TridiagonalEvd evd = tridiagonal_evd(lr.T);
  return make_eigenbasis(lr.Q, evd.B, evd.R, opts.kappa_target, L, P);
}

inline ConstrainedEigenbasis solve_eigenbasis(const Graph& g, const ConstraintMatrix& C,
                                              const SolveOptions& opts = {}) {
  return solve_eigenbasis(laplacian(g), C, opts);
}

/// Rank-κ spectral operator x ↦ V·diag(φ(R))·Vᵀ·x, applied factor by factor.
class SpectralOperator {
 public:
  SpectralOperator(Eigen::MatrixXd V, Eigen::VectorXd fR)
      : V_(std::move(V)), fR_(std::move(fR)) {
    if (V_.cols() != fR_.size())
      throw ValidationError("filter values do not match eigenbasis width");
  }

  int rows() const { return static_cast<int>(V_.rows()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return V_ * (fR_.asDiagonal() * (V_.transpose() * x));
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
    return V_ * (fR_.asDiagonal() * (V_.transpose() * X));
  }

  /// Dense materialization, guarded: only small operators may be formed.
  Eigen::MatrixXd dense() const {
    if (rows() > 512)
      throw ValidationError("refusing to densify an operator with n > 512");
    return V_ * fR_.asDiagonal() * V_.transpose();
  }

 private:
  Eigen::MatrixXd V_;
  Eigen::VectorXd fR_;
};

template <class Phi>
SpectralOperator low_rank_reconstruct(const Eigen::MatrixXd& V, const Eigen::VectorXd& R,
                                      Phi&& phi) {
  Eigen::VectorXd fR(R.size());
  for (int i = 0; i < R.size(); ++i) fR[i] = phi(R[i]);
  return SpectralOperator(V, std::move(fR));
}

inline SpectralOperator low_rank_reconstruct(const ConstrainedEigenbasis& eb) {
  return SpectralOperator(eb.V, eb.R);
}

/// Dump: header "n kappa kappa_effective", R on one line, V column-major one
/// column per line, 17 significant digits; '#'-prefixed diagnostics trailer.
inline void write_eigenbasis(std::ostream& out, const ConstrainedEigenbasis& eb) {
  const int n = static_cast<int>(eb.V.rows());
  const int kappa = static_cast<int>(eb.V.cols());
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  out << n << " " << kappa << " " << eb.kappa_effective << "\n";
  for (int i = 0; i < kappa; ++i) {
    if (i) out << " ";
    put(eb.R[i]);
  }
  out << "\n";
  for (int j = 0; j < kappa; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i) out << " ";
      put(eb.V(i, j));
    }
    out << "\n";
  }
  for (size_t i = 0; i < eb.diagnostics.residuals.size(); ++i) {
    out << "# residual " << i << " ";
    put(eb.diagnostics.residuals[i]);
    out << "\n";
  }
  out << "# max_constraint_violation ";
  put(eb.diagnostics.max_constraint_violation);
  out << "\n# max_orthogonality_loss ";
  put(eb.diagnostics.max_orthogonality_loss);
  out << "\n";
}

inline ConstrainedEigenbasis parse_eigenbasis(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  std::string numeric;
  ConstrainedEigenbasis eb;
  std::vector<std::pair<std::string, double>> diag_entries;
  while (std::getline(lines, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ls(line);
      std::string hash, key;
      ls >> hash >> key;
      if (key == "residual") {
        int idx;
        double val;
        if (ls >> idx >> val) diag_entries.emplace_back("residual", val);
      } else {
        double val;
        if (ls >> val) diag_entries.emplace_back(key, val);
      }
      continue;
    }
    numeric += line;
    numeric += "\n";
  }
  std::istringstream in(numeric);
  int n, kappa, keff;
  if (!(in >> n >> kappa >> keff) || n < 0 || kappa < 1 || keff < 0 || keff > kappa)
    throw ParseError("malformed eigenbasis header", 1);
  eb.kappa_effective = keff;
  eb.R.resize(kappa);
  for (int i = 0; i < kappa; ++i)
    if (!(in >> eb.R[i])) throw ParseError("truncated Ritz value list", 2);
  eb.V.resize(n, kappa);
  for (int j = 0; j < kappa; ++j)
    for (int i = 0; i < n; ++i)
      if (!(in >> eb.V(i, j))) throw ParseError("truncated eigenvector data", 3 + j);
  for (const auto& [key, val] : diag_entries) {
    if (key == "residual") eb.diagnostics.residuals.push_back(val);
    else if (key == "max_constraint_violation") eb.diagnostics.max_constraint_violation = val;
    else if (key == "max_orthogonality_loss") eb.diagnostics.max_orthogonality_loss = val;
  }
  return eb;
}

} // namespace llwlc
