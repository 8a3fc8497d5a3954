#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llwlc/errors.hpp"
#include "llwlc/generators.hpp"
#include "llwlc/graph.hpp"
#include "llwlc/lanczos.hpp"
#include "llwlc/rng.hpp"

namespace llwlc {

/// Chebyshev polynomial of the first kind, T_d(x), by the three-term recurrence.
inline double chebyshev(int degree, double x) {
  if (degree < 0) throw ValidationError("Chebyshev degree must be >= 0");
  if (degree == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int d = 2; d <= degree; ++d) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Result of one low-rank reconstruction bound evaluation.
struct BoundReport {
  double lhs = 0.0;   ///< ‖L − QTQᵀ‖²_F from a κ-step run
  double rhs = 0.0;   ///< bound value from the dense spectrum
  int j = 0;          ///< split index
  int kappa = 0;      ///< requested steps
  double slack = 0.0; ///< rhs − lhs
  bool inconclusive = false;
  std::string reason; ///< degeneracy note when inconclusive
};

/// Evaluates the κ-step low-rank Frobenius bound at split index j. Index
/// conventions follow the statement: eigenvalues descending λ₁ ≥ … ≥ λ_N,
/// 𝒰ᵢ = span{u₁..uᵢ}, γᵢ = (λᵢ−λ_{i+1})/(λ_{i+1}−λ_N). Cases where a
/// denominator degenerates (zero start-vector angle, repeated eigenvalues at
/// the split, collapsed tail spectrum, early Krylov breakdown) are reported
/// as inconclusive rather than pass/fail.
inline BoundReport low_rank_bound_check(const Eigen::MatrixXd& L, const Eigen::VectorXd& nu,
                                  int kappa, int j) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n) throw ValidationError("matrix must be square");
  if (n > 128) throw ValidationError("dense oracle capped at n <= 128");
  if (!(1 < j && j < n)) throw ValidationError("split index must satisfy 1 < j < n");
  if (!(kappa > j)) throw ValidationError("steps must exceed the split index");
  if (nu.size() != n) throw ValidationError("start vector size mismatch");

  BoundReport rep;
  rep.j = j;
  rep.kappa = kappa;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
  // Descending order.
  Eigen::VectorXd lam(n);
  Eigen::MatrixXd U(n, n);
  for (int i = 0; i < n; ++i) {
    lam[i] = es.eigenvalues()[n - 1 - i];
    U.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  const double scale = std::max(1.0, std::abs(lam[0]));
  const double tau = 1e-8 * scale;

  const Eigen::VectorXd nu_hat = nu / nu.norm();
  const Eigen::VectorXd c = U.transpose() * nu_hat; // expansion coefficients

  for (int i = 0; i < j; ++i) {
    if (std::abs(c[i]) < 1e-8) {
      rep.inconclusive = true;
      rep.reason = "start vector nearly orthogonal to eigenvector " + std::to_string(i + 1);
      return rep;
    }
  }
  for (int k = 0; k < j - 1; ++k) {
    if (std::abs(lam[k] - lam[j - 1]) < tau) {
      rep.inconclusive = true;
      rep.reason = "eigenvalue " + std::to_string(k + 1) + " coincides with the split eigenvalue";
      return rep;
    }
  }
  for (int i = 0; i < j; ++i) {
    if (lam[i + 1] - lam[n - 1] < tau) {
      rep.inconclusive = true;
      rep.reason = "tail spectrum collapsed below index " + std::to_string(i + 1);
      return rep;
    }
  }

  double prod = 1.0;
  for (int k = 0; k < j - 1; ++k)
    prod *= (lam[k] - lam[n - 1]) / (lam[k] - lam[j - 1]);

  double rhs = 0.0;
  double cum_cos2 = 0.0;
  for (int i = 0; i < j; ++i) {
    cum_cos2 += c[i] * c[i];
    const double sin_subspace = std::sqrt(std::max(0.0, 1.0 - cum_cos2));
    const double gamma = (lam[i] - lam[i + 1]) / (lam[i + 1] - lam[n - 1]);
    const double T = chebyshev(kappa - (i + 1), 1.0 + 2.0 * gamma);
    const double ratio = sin_subspace * prod / (std::abs(c[i]) * T);
    rhs += lam[i] * lam[i] * ratio * ratio;
  }
  for (int i = j; i < n; ++i) rhs += lam[i] * lam[i];
  rep.rhs = rhs;

  // κ-step run with the same start vector (plain recurrence, no restarts).
  LanczosOptions lopts;
  lopts.kappa = kappa;
  const LanczosResult lr = constrained_lanczos(L, Projector(), nu, lopts);
  if (lr.T.steps() < std::min(kappa, n)) {
    rep.inconclusive = true;
    rep.reason = "Krylov breakdown after " + std::to_string(lr.T.steps()) + " steps";
    return rep;
  }
  const Eigen::MatrixXd recon = lr.Q * lr.T.dense() * lr.Q.transpose();
  rep.lhs = (L - recon).squaredNorm();
  rep.slack = rep.rhs - rep.lhs;
  return rep;
}

/// Result of one first-order eigenvalue perturbation comparison.
struct PerturbationReport {
  double shift = 0.0;       ///< λ̃_min − λ_min
  double estimate = 0.0;    ///< first-order tridiagonal expression at scale
  double discrepancy = 0.0; ///< |shift − estimate|
  bool inconclusive = false;
  std::string reason;
};

/// Compares the true shift of the smallest eigenvalue of L + scale·E against
/// the first-order expression Σ E(i,i)u(i)² + 2Σ E(i,i+1)u(i)u(i+1) evaluated
/// with the unperturbed unit eigenvector u, for symmetric tridiagonal E.
inline PerturbationReport perturbation_check(const Eigen::MatrixXd& L,
                                         const Eigen::MatrixXd& E, double scale) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n || E.rows() != n || E.cols() != n)
    throw ValidationError("shape mismatch");
  PerturbationReport rep;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
  const double l0 = es.eigenvalues()[0];
  if (n > 1 && es.eigenvalues()[1] - l0 < 1e-8 * std::max(1.0, std::abs(es.eigenvalues()[n - 1]))) {
    rep.inconclusive = true;
    rep.reason = "smallest eigenvalue is not simple";
    return rep;
  }
  const Eigen::VectorXd u = es.eigenvectors().col(0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(L + scale * E);
  if (es2.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
  rep.shift = es2.eigenvalues()[0] - l0;

  double est = 0.0;
  for (int i = 0; i < n; ++i) est += E(i, i) * u[i] * u[i];
  for (int i = 0; i + 1 < n; ++i) est += 2.0 * E(i, i + 1) * u[i] * u[i + 1];
  rep.estimate = scale * est;
  rep.discrepancy = std::abs(rep.shift - rep.estimate);
  return rep;
}

// ---------------------------------------------------------------------------
// Corpus runners
// ---------------------------------------------------------------------------

namespace detail {

/// Deterministic random connected graph with n in [n_lo, n_hi].
inline Graph random_connected_graph(int n_lo, int n_hi, uint64_t seed) {
  Rng rng(mix_seed(seed, 0xC0117ULL));
  for (int attempt = 0; attempt < 256; ++attempt) {
    const int n = n_lo + static_cast<int>(rng.below(static_cast<uint64_t>(n_hi - n_lo + 1)));
    const double p = std::min(1.0, std::max(0.15, 2.5 * std::log(n) / n));
    const Graph g = erdos_renyi(n, p, rng.next_u64());
    if (connected_components(g) == 1) return g;
  }
  throw NumericalError("failed to sample a connected graph");
}

} // namespace detail

struct BoundCorpusResult {
  int total = 0;
  int conclusive = 0;
  int inconclusive = 0;
  int violations = 0; ///< slack < -1e-8
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<BoundReport> reports;
};

/// Random connected graphs n ∈ [16, 64]; per case a random split j and step
/// count κ ∈ (j, n]. `lhs_inflation` is a fault-injection hook for exercising
/// the violation path; it is added to every lhs.
inline BoundCorpusResult run_bound_corpus(int count, uint64_t seed,
                                                double lhs_inflation = 0.0) {
  BoundCorpusResult res;
  Rng rng(mix_seed(seed, 0x7E02ULL));
  for (int t = 0; t < count; ++t) {
    const Graph g = detail::random_connected_graph(16, 64, mix_seed(seed, 0x9000 + t));
    const int n = g.n;
    const Eigen::MatrixXd L = dense_laplacian(g);
    Eigen::VectorXd nu(n);
    { Rng vr(mix_seed(seed, 0xA000 + t)); for (int i = 0; i < n; ++i) nu[i] = vr.normal(); }
    const int j = 2 + static_cast<int>(rng.below(static_cast<uint64_t>(std::min(6, n - 3))));
    const int kappa = j + 1 + static_cast<int>(rng.below(static_cast<uint64_t>(n - j)));
    BoundReport rep = low_rank_bound_check(L, nu, kappa, j);
    if (!rep.inconclusive) {
      rep.lhs += lhs_inflation;
      rep.slack = rep.rhs - rep.lhs;
      ++res.conclusive;
      res.min_slack = std::min(res.min_slack, rep.slack);
      if (rep.slack < -1e-8) ++res.violations;
    } else {
      ++res.inconclusive;
    }
    ++res.total;
    res.reports.push_back(std::move(rep));
  }
  return res;
}

struct PerturbationCorpusResult {
  int total = 0;
  int conclusive = 0;
  std::vector<double> ratios; ///< discrepancy(scale) / discrepancy(scale/10)
  double median_ratio = 0.0;
};

/// Random connected graphs; random symmetric tridiagonal perturbations at two
/// scales a decade apart. First-order correctness shows as a discrepancy ratio
/// near 100 (quadratic residual).
inline PerturbationCorpusResult run_perturbation_corpus(int count, uint64_t seed,
                                                double scale = 1e-4) {
  PerturbationCorpusResult res;
  for (int t = 0; t < count; ++t) {
    const Graph g = detail::random_connected_graph(12, 24, mix_seed(seed, 0xB000 + t));
    const int n = g.n;
    const Eigen::MatrixXd L = dense_laplacian(g);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
    Rng er(mix_seed(seed, 0xC000 + t));
    for (int i = 0; i < n; ++i) E(i, i) = 2.0 * er.unit() - 1.0;
    for (int i = 0; i + 1 < n; ++i) E(i, i + 1) = E(i + 1, i) = 2.0 * er.unit() - 1.0;
    const PerturbationReport big = perturbation_check(L, E, scale);
    const PerturbationReport small = perturbation_check(L, E, scale / 10.0);
    ++res.total;
    if (big.inconclusive || small.inconclusive || small.discrepancy == 0.0) continue;
    ++res.conclusive;
    res.ratios.push_back(big.discrepancy / small.discrepancy);
  }
  if (!res.ratios.empty()) {
    std::vector<double> sorted = res.ratios;
    std::sort(sorted.begin(), sorted.end());
    res.median_ratio = sorted[sorted.size() / 2];
  }
  return res;
}

inline void write_bound_report(std::ostream& out, const BoundReport& rep) {
  char buf[64];
  auto put = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << "=" << buf << "\n";
  };
  out << "check=low-rank-bound\n";
  out << "j=" << rep.j << "\nkappa=" << rep.kappa << "\n";
  if (rep.inconclusive) {
    out << "status=inconclusive\nreason=" << rep.reason << "\n";
  } else {
    put("lhs", rep.lhs);
    put("rhs", rep.rhs);
    put("slack", rep.slack);
    out << "status=" << (rep.slack >= -1e-8 ? "ok" : "violation") << "\n";
  }
}

inline void write_perturbation_report(std::ostream& out, const PerturbationReport& rep) {
  char buf[64];
  auto put = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << k << "=" << buf << "\n";
  };
  out << "check=perturbation-first-order\n";
  if (rep.inconclusive) {
    out << "status=inconclusive\nreason=" << rep.reason << "\n";
  } else {
    put("shift", rep.shift);
    put("estimate", rep.estimate);
    put("discrepancy", rep.discrepancy);
    out << "status=ok\n";
  }
}

inline void write_bound_corpus_csv(std::ostream& out, const BoundCorpusResult& res) {
  out << "case,status,j,kappa,lhs,rhs,slack\n";
  char buf[64];
  for (size_t i = 0; i < res.reports.size(); ++i) {
    const BoundReport& r = res.reports[i];
    out << i << "," << (r.inconclusive ? "inconclusive" : (r.slack >= -1e-8 ? "ok" : "violation"))
        << "," << r.j << "," << r.kappa;
    for (double v : {r.lhs, r.rhs, r.slack}) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << (r.inconclusive ? "" : buf);
    }
    out << "\n";
  }
}

} // namespace llwlc
