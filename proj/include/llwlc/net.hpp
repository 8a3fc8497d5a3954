#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "llwlc/dataset.hpp"
#include "llwlc/errors.hpp"
#include "llwlc/rng.hpp"

namespace llwlc {

/// Scalar filter applied elementwise to the Ritz values: a one-hidden-layer
/// perceptron r ↦ W2ᵀ·ReLU(W1·r + b1) + b2 with 32 hidden channels.
struct FilterMLP {
  Eigen::VectorXd W1, b1, W2;
  double b2 = 0.0;

  int hidden() const { return static_cast<int>(W1.size()); }

  /// Hidden activations for a vector of eigenvalues: H(k,j) = ReLU(R_k·W1_j + b1_j).
  Eigen::MatrixXd hidden_forward(const Eigen::VectorXd& R) const {
    return (R * W1.transpose()).rowwise() + b1.transpose();
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& R) const {
    const Eigen::MatrixXd H = hidden_forward(R).cwiseMax(0.0);
    return (H * W2).array() + b2;
  }
};

struct SpectralBlock {
  FilterMLP filter;
  Eigen::MatrixXd W; ///< channel mixing, d_in × d_out
};

/// LLwLC spectral network: stacked blocks X_{i+1} = ReLU(V·diag(f_i(R))·Vᵀ·X_i·W_i)
/// over a shared eigenbasis, sort pooling, one affine head, logistic output.
struct SpectralModel {
  std::vector<SpectralBlock> blocks;
  int pool_k = 10;
  Eigen::VectorXd head_w;
  double head_b = 0.0;

  int in_channels() const { return static_cast<int>(blocks.front().W.rows()); }
  int out_channels() const { return static_cast<int>(blocks.back().W.cols()); }
};

/// Deterministic initialization; filter bias b2 starts at 1 so every block
/// begins close to the plain spectral projection V·Vᵀ.
inline SpectralModel make_model(const std::vector<int>& channels, int pool_k,
                                uint64_t seed, int hidden = 32) {
  if (channels.size() < 2) throw ValidationError("need at least one block");
  if (pool_k < 1) throw ValidationError("pool_k must be >= 1");
  Rng rng(mix_seed(seed, 0x90DE1ULL));
  auto randn = [&](double scale) { return scale * rng.normal(); };
  SpectralModel m;
  m.pool_k = pool_k;
  for (size_t i = 0; i + 1 < channels.size(); ++i) {
    SpectralBlock blk;
    const double s1 = std::sqrt(2.0 / (1 + hidden));
    blk.filter.W1.resize(hidden);
    blk.filter.b1 = Eigen::VectorXd::Zero(hidden);
    blk.filter.W2.resize(hidden);
    for (int j = 0; j < hidden; ++j) blk.filter.W1[j] = randn(s1);
    for (int j = 0; j < hidden; ++j) blk.filter.W2[j] = randn(s1);
    blk.filter.b2 = 1.0;
    const int din = channels[i], dout = channels[i + 1];
    const double sw = std::sqrt(2.0 / (din + dout));
    blk.W.resize(din, dout);
    for (int c = 0; c < dout; ++c)
      for (int r = 0; r < din; ++r) blk.W(r, c) = randn(sw);
    m.blocks.push_back(std::move(blk));
  }
  const int zlen = pool_k * channels.back();
  const double sh = std::sqrt(2.0 / (zlen + 1));
  m.head_w.resize(zlen);
  for (int j = 0; j < zlen; ++j) m.head_w[j] = randn(sh);
  m.head_b = 0.0;
  return m;
}

/// One spectral block: σ(V·diag(f(R))·Vᵀ·X·W). The activation can be disabled
/// to inspect the pre-activation linear map.
inline Eigen::MatrixXd block_forward(const Eigen::MatrixXd& V, const Eigen::VectorXd& R,
                                     const FilterMLP& f, const Eigen::MatrixXd& X,
                                     const Eigen::MatrixXd& W, bool apply_relu = true) {
  if (V.rows() != X.rows())
    throw ValidationError("eigenbasis and features disagree on node count");
  if (V.cols() != R.size())
    throw ValidationError("eigenbasis width does not match Ritz value count");
  if (X.cols() != W.rows())
    throw ValidationError("feature channels do not match mixing weights");
  const Eigen::VectorXd fR = f(R);
  const Eigen::MatrixXd A = V * (fR.asDiagonal() * (V.transpose() * (X * W)));
  return apply_relu ? A.cwiseMax(0.0).eval() : A;
}

/// Node order for sort pooling: descending by last channel, ties broken by
/// earlier channels in turn, then ascending node index.
inline std::vector<int> sort_pooling_order(const Eigen::MatrixXd& X) {
  std::vector<int> idx(X.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    for (int c = static_cast<int>(X.cols()) - 1; c >= 0; --c) {
      if (X(a, c) != X(b, c)) return X(a, c) > X(b, c);
    }
    return a < b;
  });
  return idx;
}

/// Flattens the top pool_k sorted rows (row-major); missing rows are zero.
inline Eigen::VectorXd sort_pooling(const Eigen::MatrixXd& X, int pool_k,
                                    std::vector<int>* order_out = nullptr) {
  if (pool_k < 1) throw ValidationError("pool_k must be >= 1");
  const int d = static_cast<int>(X.cols());
  const std::vector<int> order = sort_pooling_order(X);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(pool_k * d);
  const int take = std::min<int>(pool_k, static_cast<int>(X.rows()));
  for (int r = 0; r < take; ++r) z.segment(r * d, d) = X.row(order[r]);
  if (order_out) *order_out = order;
  return z;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double bce_loss(double p, int y) {
  const double q = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return y ? -std::log(q) : -std::log(1.0 - q);
}

/// Intermediate state of one forward pass, kept for backpropagation.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> X;  ///< X0..XK (post-activation)
  std::vector<Eigen::MatrixXd> S;  ///< Vᵀ·X_i·W_i per block (κ × d_out)
  std::vector<Eigen::MatrixXd> A;  ///< pre-activation per block
  std::vector<Eigen::MatrixXd> H;  ///< filter hidden activations per block (κ × h)
  std::vector<Eigen::VectorXd> fR; ///< filter outputs per block
  std::vector<int> pool_order;
  Eigen::VectorXd z;
  double logit = 0.0;
  double p = 0.5;
};

inline double forward(const SpectralModel& model, const LinkInstance& inst,
                      ForwardTrace* trace = nullptr) {
  const Eigen::MatrixXd& V = inst.eb.V;
  const Eigen::VectorXd& R = inst.eb.R;
  if (V.rows() != inst.X0.rows())
    throw ValidationError("instance eigenbasis and features disagree on node count");
  ForwardTrace local;
  ForwardTrace& t = trace ? *trace : local;
  t.X.clear(); t.S.clear(); t.A.clear(); t.H.clear(); t.fR.clear();
  t.X.push_back(inst.X0);
  for (const SpectralBlock& blk : model.blocks) {
    if (t.X.back().cols() != blk.W.rows())
      throw ValidationError("feature channels do not match mixing weights");
    const Eigen::MatrixXd Hpre = blk.filter.hidden_forward(R);
    const Eigen::MatrixXd H = Hpre.cwiseMax(0.0);
    const Eigen::VectorXd fR = ((H * blk.filter.W2).array() + blk.filter.b2).matrix();
    const Eigen::MatrixXd S = V.transpose() * (t.X.back() * blk.W);
    const Eigen::MatrixXd A = V * (fR.asDiagonal() * S);
    t.H.push_back(H);
    t.fR.push_back(fR);
    t.S.push_back(S);
    t.A.push_back(A);
    t.X.push_back(A.cwiseMax(0.0));
  }
  t.z = sort_pooling(t.X.back(), model.pool_k, &t.pool_order);
  if (t.z.size() != model.head_w.size())
    throw ValidationError("pooled vector does not match head weights");
  t.logit = model.head_w.dot(t.z) + model.head_b;
  t.p = sigmoid(t.logit);
  return t.p;
}

// ---------------------------------------------------------------------------
// Flat parameter vector: every optimizer, checkpoint, and finite-difference
// check works over the same packed layout.
// ---------------------------------------------------------------------------

struct ParameterGroup {
  std::string name;
  int offset = 0;
  int size = 0;
};

inline int num_params(const SpectralModel& m) {
  int total = 0;
  for (const auto& blk : m.blocks)
    total += static_cast<int>(blk.filter.W1.size() + blk.filter.b1.size() +
                              blk.filter.W2.size()) + 1 +
             static_cast<int>(blk.W.size());
  total += static_cast<int>(m.head_w.size()) + 1;
  return total;
}

inline std::vector<ParameterGroup> parameter_groups(const SpectralModel& m) {
  std::vector<ParameterGroup> groups;
  int off = 0;
  auto add = [&](const std::string& name, int size) {
    groups.push_back({name, off, size});
    off += size;
  };
  for (size_t i = 0; i < m.blocks.size(); ++i) {
    const auto& blk = m.blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    add(p + "filter.W1", static_cast<int>(blk.filter.W1.size()));
    add(p + "filter.b1", static_cast<int>(blk.filter.b1.size()));
    add(p + "filter.W2", static_cast<int>(blk.filter.W2.size()));
    add(p + "filter.b2", 1);
    add(p + "W", static_cast<int>(blk.W.size()));
  }
  add("head_w", static_cast<int>(m.head_w.size()));
  add("head_b", 1);
  return groups;
}

inline Eigen::VectorXd pack_params(const SpectralModel& m) {
  Eigen::VectorXd theta(num_params(m));
  int off = 0;
  auto put_vec = [&](const Eigen::VectorXd& v) {
    theta.segment(off, v.size()) = v;
    off += static_cast<int>(v.size());
  };
  auto put_mat = [&](const Eigen::MatrixXd& M) {
    theta.segment(off, M.size()) = Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
    off += static_cast<int>(M.size());
  };
  for (const auto& blk : m.blocks) {
    put_vec(blk.filter.W1);
    put_vec(blk.filter.b1);
    put_vec(blk.filter.W2);
    theta[off++] = blk.filter.b2;
    put_mat(blk.W);
  }
  put_vec(m.head_w);
  theta[off++] = m.head_b;
  return theta;
}

inline void unpack_params(SpectralModel& m, const Eigen::VectorXd& theta) {
  if (theta.size() != num_params(m))
    throw ValidationError("parameter vector length mismatch");
  int off = 0;
  auto get_vec = [&](Eigen::VectorXd& v) {
    v = theta.segment(off, v.size());
    off += static_cast<int>(v.size());
  };
  auto get_mat = [&](Eigen::MatrixXd& M) {
    Eigen::Map<Eigen::VectorXd>(M.data(), M.size()) = theta.segment(off, M.size());
    off += static_cast<int>(M.size());
  };
  for (auto& blk : m.blocks) {
    get_vec(blk.filter.W1);
    get_vec(blk.filter.b1);
    get_vec(blk.filter.W2);
    blk.filter.b2 = theta[off++];
    get_mat(blk.W);
  }
  get_vec(m.head_w);
  m.head_b = theta[off++];
}

/// Exact gradient of the mean binary-cross-entropy loss over a batch, packed
/// in the flat layout. The eigenbasis (V, R) is treated as constant data.
inline std::pair<Eigen::VectorXd, double> gradients(
    const SpectralModel& model, const std::vector<const LinkInstance*>& batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  const int P = num_params(model);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(P);
  double total_loss = 0.0;

  const int nb = static_cast<int>(model.blocks.size());
  std::vector<Eigen::VectorXd> gW1(nb), gb1(nb), gW2(nb);
  std::vector<double> gb2(nb);
  std::vector<Eigen::MatrixXd> gW(nb);
  for (int i = 0; i < nb; ++i) {
    gW1[i] = Eigen::VectorXd::Zero(model.blocks[i].filter.W1.size());
    gb1[i] = Eigen::VectorXd::Zero(model.blocks[i].filter.b1.size());
    gW2[i] = Eigen::VectorXd::Zero(model.blocks[i].filter.W2.size());
    gb2[i] = 0.0;
    gW[i] = Eigen::MatrixXd::Zero(model.blocks[i].W.rows(), model.blocks[i].W.cols());
  }
  Eigen::VectorXd ghead_w = Eigen::VectorXd::Zero(model.head_w.size());
  double ghead_b = 0.0;

  ForwardTrace t;
  for (const LinkInstance* inst : batch) {
    const double p = forward(model, *inst, &t);
    total_loss += bce_loss(p, inst->label);

    const Eigen::MatrixXd& V = inst->eb.V;
    const Eigen::VectorXd& R = inst->eb.R;
    const double dlogit = p - inst->label;
    ghead_w += dlogit * t.z;
    ghead_b += dlogit;

    // Scatter the pooled gradient back onto the selected rows.
    const int d = static_cast<int>(t.X.back().cols());
    Eigen::MatrixXd dX = Eigen::MatrixXd::Zero(t.X.back().rows(), d);
    const int take = std::min<int>(model.pool_k, static_cast<int>(t.X.back().rows()));
    for (int r = 0; r < take; ++r)
      dX.row(t.pool_order[r]) = dlogit * model.head_w.segment(r * d, d);

    for (int i = nb - 1; i >= 0; --i) {
      const SpectralBlock& blk = model.blocks[i];
      const Eigen::MatrixXd dA =
          (t.A[i].array() > 0.0).select(dX, Eigen::MatrixXd::Zero(dX.rows(), dX.cols()));
      const Eigen::MatrixXd VtdA = V.transpose() * dA; // κ × d_out
      // A = V·diag(fR)·S with S = Vᵀ·X_i·W, so the filter gradient is the
      // per-eigenvalue row dot of Vᵀ·dA and S.
      const Eigen::VectorXd dfR = (VtdA.array() * t.S[i].array()).rowwise().sum();
      // Backprop through the scalar MLP, summed over eigenvalues.
      gW2[i] += t.H[i].transpose() * dfR;
      gb2[i] += dfR.sum();
      Eigen::MatrixXd dH = dfR * blk.filter.W2.transpose(); // κ × h
      dH = (t.H[i].array() > 0.0)
               .select(dH, Eigen::MatrixXd::Zero(dH.rows(), dH.cols()));
      gW1[i] += dH.transpose() * R;
      gb1[i] += dH.colwise().sum().transpose();
      // Mixing weights and upstream features.
      const Eigen::MatrixXd dS = t.fR[i].asDiagonal() * VtdA;    // κ × d_out
      const Eigen::MatrixXd dXW = V * dS;                        // n × d_out
      gW[i] += t.X[i].transpose() * dXW;
      if (i > 0) dX = dXW * blk.W.transpose();
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  int off = 0;
  auto put_vec = [&](const Eigen::VectorXd& v) {
    grad.segment(off, v.size()) = inv * v;
    off += static_cast<int>(v.size());
  };
  auto put_mat = [&](const Eigen::MatrixXd& M) {
    grad.segment(off, M.size()) =
        inv * Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
    off += static_cast<int>(M.size());
  };
  for (int i = 0; i < nb; ++i) {
    put_vec(gW1[i]);
    put_vec(gb1[i]);
    put_vec(gW2[i]);
    grad[off++] = inv * gb2[i];
    put_mat(gW[i]);
  }
  put_vec(ghead_w);
  grad[off++] = inv * ghead_b;

  const double mean_loss = total_loss * inv;
  if (!std::isfinite(mean_loss))
    throw NumericalError("non-finite training loss; aborting");
  return {grad, mean_loss};
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Probability that a uniformly random positive outscores a uniformly random
/// negative, ties counting one half (rank formula with midranks).
inline double auc_score(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty())
    throw ValidationError("AUC undefined: a class is empty");
  std::vector<std::pair<double, int>> all; // (score, is_positive)
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
    for (size_t k = i; k < j; ++k)
      if (all[k].second) rank_sum_pos += midrank;
    i = j;
  }
  const double P = static_cast<double>(pos.size());
  const double N = static_cast<double>(neg.size());
  return (rank_sum_pos - P * (P + 1) / 2.0) / (P * N);
}

/// Fraction of positives scoring strictly above the K-th highest negative.
inline double hits_at_k(const std::vector<double>& pos, const std::vector<double>& neg,
                        int K) {
  if (pos.empty() || neg.empty())
    throw ValidationError("Hits@K undefined: a class is empty");
  if (K < 1) throw ValidationError("K must be >= 1");
  double threshold;
  if (static_cast<int>(neg.size()) < K) {
    threshold = -std::numeric_limits<double>::infinity();
  } else {
    std::vector<double> sorted = neg;
    std::nth_element(sorted.begin(), sorted.begin() + (K - 1), sorted.end(),
                     std::greater<double>());
    threshold = sorted[K - 1];
  }
  int hits = 0;
  for (double s : pos)
    if (s > threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pos.size());
}

inline std::pair<std::vector<double>, std::vector<double>> score_dataset(
    const SpectralModel& model, const std::vector<LinkInstance>& insts) {
  std::vector<double> pos, neg;
  for (const auto& inst : insts)
    (inst.label ? pos : neg).push_back(forward(model, inst));
  return {pos, neg};
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  double lr = 0.001;
  int epochs = 20;
  int kappa_target = 10;
  uint64_t seed = 1;
  ConstraintPolicy policy = ConstraintPolicy::Neumann;
  int vdel_k = 10;
  std::string optimizer = "gd"; ///< "gd" (plain full-batch descent) or "adam"
  int batch_size = 0;           ///< 0 = full batch
  int hits_k = 10;
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double auc = 0.0;
  double hits = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> history;
};

inline TrainResult train(SpectralModel& model, LinkDataset& ds, const TrainConfig& cfg) {
  if (cfg.lr < 0) throw ValidationError("learning rate must be >= 0");
  if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (ds.train.empty() || ds.test.empty())
    throw ValidationError("train and test splits must be nonempty");
  if (cfg.optimizer != "gd" && cfg.optimizer != "adam")
    throw ValidationError("unknown optimizer variant '" + cfg.optimizer + "'");

  Eigen::VectorXd theta = pack_params(model);
  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(theta.size());
  long long adam_t = 0;

  TrainResult result;
  std::vector<int> order(ds.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Stochastic vertex-deleted constraints: fresh columns and eigenbases
    // every epoch, from an epoch-derived seed.
    if (cfg.policy == ConstraintPolicy::VertexDeleted) {
      for (size_t i = 0; i < ds.train.size(); ++i)
        refresh_eigenbasis(ds.train[i], ds.observed, cfg.policy, cfg.kappa_target,
                           cfg.vdel_k,
                           mix_seed(cfg.seed, 0xEC000000ULL + 4096ULL * epoch + i));
    }

    Rng shuffle_rng(mix_seed(cfg.seed, 0x5F0ULL + epoch));
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.below(static_cast<uint64_t>(i) + 1)]);

    const int bs = cfg.batch_size > 0 ? cfg.batch_size
                                      : static_cast<int>(ds.train.size());
    double epoch_loss = 0.0;
    int seen = 0;
    for (size_t start = 0; start < order.size(); start += bs) {
      std::vector<const LinkInstance*> batch;
      for (size_t i = start; i < std::min(order.size(), start + bs); ++i)
        batch.push_back(&ds.train[order[i]]);
      const auto [grad, loss] = gradients(model, batch);
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += static_cast<int>(batch.size());
      if (cfg.optimizer == "gd") {
        theta -= cfg.lr * grad;
      } else {
        ++adam_t;
        adam_m = 0.9 * adam_m + 0.1 * grad;
        adam_v = 0.999 * adam_v.array() + 0.001 * grad.array().square();
        const double mhat = 1.0 - std::pow(0.9, static_cast<double>(adam_t));
        const double vhat = 1.0 - std::pow(0.999, static_cast<double>(adam_t));
        theta.array() -= cfg.lr * (adam_m.array() / mhat) /
                         ((adam_v.array() / vhat).sqrt() + 1e-8);
      }
      unpack_params(model, theta);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.loss = epoch_loss / static_cast<double>(seen);
    const auto [pos, neg] = score_dataset(model, ds.test);
    em.auc = auc_score(pos, neg);
    em.hits = hits_at_k(pos, neg, cfg.hits_k);
    result.history.push_back(em);
  }
  return result;
}

inline void write_metrics_csv(std::ostream& out, const TrainResult& result) {
  out << "epoch,loss,auc,hits_at_k\n";
  char buf[64];
  for (const auto& em : result.history) {
    out << em.epoch;
    for (double v : {em.loss, em.auc, em.hits}) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Checkpoint serialization (versioned text)
// ---------------------------------------------------------------------------

inline void write_checkpoint(std::ostream& out, const SpectralModel& m,
                             const std::vector<std::pair<std::string, std::string>>&
                                 config_echo = {}) {
  out << "llwlc-checkpoint v1\n";
  for (const auto& [k, v] : config_echo) out << "# " << k << "=" << v << "\n";
  out << "channels";
  out << " " << m.blocks.front().W.rows();
  for (const auto& blk : m.blocks) out << " " << blk.W.cols();
  out << "\nhidden " << m.blocks.front().filter.hidden();
  out << "\npool_k " << m.pool_k << "\n";
  char buf[64];
  auto put_tensor = [&](const std::string& name, const double* data, int size,
                        const std::string& shape) {
    out << "tensor " << name << " " << shape << "\n";
    for (int i = 0; i < size; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", data[i]);
      out << (i ? " " : "") << buf;
    }
    out << "\n";
  };
  for (size_t i = 0; i < m.blocks.size(); ++i) {
    const auto& blk = m.blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    put_tensor(p + "filter.W1", blk.filter.W1.data(),
               static_cast<int>(blk.filter.W1.size()),
               std::to_string(blk.filter.W1.size()));
    put_tensor(p + "filter.b1", blk.filter.b1.data(),
               static_cast<int>(blk.filter.b1.size()),
               std::to_string(blk.filter.b1.size()));
    put_tensor(p + "filter.W2", blk.filter.W2.data(),
               static_cast<int>(blk.filter.W2.size()),
               std::to_string(blk.filter.W2.size()));
    put_tensor(p + "filter.b2", &blk.filter.b2, 1, "1");
    put_tensor(p + "W", blk.W.data(), static_cast<int>(blk.W.size()),
               std::to_string(blk.W.rows()) + " " + std::to_string(blk.W.cols()));
  }
  put_tensor("head_w", m.head_w.data(), static_cast<int>(m.head_w.size()),
             std::to_string(m.head_w.size()));
  put_tensor("head_b", &m.head_b, 1, "1");
  out << "end\n";
}

inline SpectralModel parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("llwlc-checkpoint v1", 0) != 0)
    throw ParseError("bad checkpoint magic", 1);
  std::vector<int> channels;
  int hidden = 32, pool_k = 10;
  std::streampos tensors_start = in.tellg();
  // First pass: structural header lines.
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') { tensors_start = in.tellg(); continue; }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "channels") {
      int c;
      while (ls >> c) channels.push_back(c);
    } else if (key == "hidden") {
      ls >> hidden;
    } else if (key == "pool_k") {
      ls >> pool_k;
    } else {
      break; // first tensor line
    }
    tensors_start = in.tellg();
  }
  if (channels.size() < 2) throw ParseError("checkpoint lacks channel chain", 1);
  SpectralModel m = make_model(channels, pool_k, 0, hidden);

  in.clear();
  in.seekg(tensors_start);
  auto read_tensor = [&](const std::string& want, double* data, int size) {
    std::string tline;
    do {
      if (!std::getline(in, tline)) throw ParseError("missing tensor " + want, 0);
    } while (tline.empty() || tline[0] == '#');
    std::istringstream ls(tline);
    std::string tag, name;
    ls >> tag >> name;
    if (tag != "tensor" || name != want)
      throw ParseError("expected tensor " + want + ", found '" + tline + "'", 0);
    for (int i = 0; i < size; ++i)
      if (!(in >> data[i])) throw ParseError("truncated tensor " + want, 0);
    std::getline(in, tline); // consume rest of the value line
  };
  for (size_t i = 0; i < m.blocks.size(); ++i) {
    auto& blk = m.blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    read_tensor(p + "filter.W1", blk.filter.W1.data(),
                static_cast<int>(blk.filter.W1.size()));
    read_tensor(p + "filter.b1", blk.filter.b1.data(),
                static_cast<int>(blk.filter.b1.size()));
    read_tensor(p + "filter.W2", blk.filter.W2.data(),
                static_cast<int>(blk.filter.W2.size()));
    read_tensor(p + "filter.b2", &blk.filter.b2, 1);
    read_tensor(p + "W", blk.W.data(), static_cast<int>(blk.W.size()));
  }
  read_tensor("head_w", m.head_w.data(), static_cast<int>(m.head_w.size()));
  read_tensor("head_b", &m.head_b, 1);
  return m;
}

} // namespace llwlc
