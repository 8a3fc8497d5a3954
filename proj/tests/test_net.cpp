#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "llwlc/dataset.hpp"
#include "llwlc/generators.hpp"
#include "llwlc/lanczos.hpp"
#include "llwlc/net.hpp"
#include "oracles.hpp"

using namespace llwlc;

namespace {

FilterMLP constant_filter(double value, int hidden = 4) {
  FilterMLP f;
  f.W1 = Eigen::VectorXd::Zero(hidden);
  f.b1 = Eigen::VectorXd::Zero(hidden);
  f.W2 = Eigen::VectorXd::Zero(hidden);
  f.b2 = value;
  return f;
}

FilterMLP relu_identity_filter(int hidden = 4) {
  FilterMLP f = constant_filter(0.0, hidden);
  f.W1[0] = 1.0;
  f.W2[0] = 1.0;
  return f;
}

ConstrainedEigenbasis full_basis(const Graph& g, uint64_t seed = 1) {
  SolveOptions opts;
  opts.kappa_target = g.n;
  opts.exhaust = true;
  opts.seed = seed;
  ConstraintMatrix none;
  none.n = g.n;
  return solve_eigenbasis(g, none, opts);
}

LinkDataset small_dataset(ConstraintPolicy policy = ConstraintPolicy::Neumann,
                          int kappa = 6, uint64_t seed = 3) {
  const Graph g = erdos_renyi(30, 0.15, 17);
  DatasetConfig cfg;
  cfg.test_fraction = 0.15;
  cfg.seed = seed;
  cfg.policy = policy;
  cfg.kappa_target = kappa;
  cfg.vdel_k = 3;
  cfg.max_train_per_class = 12;
  cfg.max_test_per_class = 6;
  return make_link_dataset(g, cfg);
}

} // namespace

TEST_CASE("sort pooling selects and flattens the top rows") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 3, 2;
  Eigen::VectorXd z = sort_pooling(x, 2);
  REQUIRE(z.size() == 2);
  REQUIRE(z[0] == 3.0);
  REQUIRE(z[1] == 2.0);
}

TEST_CASE("sort pooling zero-pads past the node count") {
  Eigen::MatrixXd x(2, 1);
  x << 1, 3;
  Eigen::VectorXd z = sort_pooling(x, 4);
  REQUIRE(z.size() == 4);
  REQUIRE(z[0] == 3.0);
  REQUIRE(z[1] == 1.0);
  REQUIRE(z[2] == 0.0);
  REQUIRE(z[3] == 0.0);
}

TEST_CASE("sort pooling breaks ties by earlier channels then node index") {
  Eigen::MatrixXd x(3, 2);
  // Last channel ties everywhere; the first channel decides, descending.
  x << 1, 5,
       2, 5,
       0, 5;
  REQUIRE(sort_pooling_order(x) == std::vector<int>{1, 0, 2});
  // Full tie falls back to ascending node index.
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(3, 2, 7.0);
  REQUIRE(sort_pooling_order(y) == std::vector<int>{0, 1, 2});
  // Multi-row flattening is row-major.
  std::vector<int> order;
  Eigen::VectorXd z = sort_pooling(x, 2, &order);
  REQUIRE(order == std::vector<int>{1, 0, 2});
  REQUIRE(z[0] == 2.0);
  REQUIRE(z[1] == 5.0);
  REQUIRE(z[2] == 1.0);
  REQUIRE(z[3] == 5.0);
}

TEST_CASE("binary cross entropy values and clamping") {
  REQUIRE(bce_loss(0.5, 1) == Catch::Approx(std::log(2.0)));
  REQUIRE(bce_loss(0.5, 0) == Catch::Approx(std::log(2.0)));
  REQUIRE(bce_loss(0.9, 1) == Catch::Approx(-std::log(0.9)));
  REQUIRE(bce_loss(0.9, 0) == Catch::Approx(-std::log(0.1)));
  // Saturated probabilities are clamped instead of producing infinities.
  REQUIRE(std::isfinite(bce_loss(0.0, 1)));
  REQUIRE(std::isfinite(bce_loss(1.0, 0)));
  REQUIRE(bce_loss(0.0, 1) == Catch::Approx(-std::log(1e-12)));
  REQUIRE(bce_loss(1.0, 1) == Catch::Approx(-std::log(1.0 - 1e-12)));
}

TEST_CASE("a zero filter zeroes the block") {
  const Graph p3 = path_graph(3);
  const ConstrainedEigenbasis eb = full_basis(p3);
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, 2);
  Eigen::MatrixXd W = Eigen::MatrixXd::Random(2, 2);
  const Eigen::MatrixXd out = block_forward(eb.V, eb.R, constant_filter(0.0), X, W);
  REQUIRE(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a unit filter over a complete basis is the identity operator") {
  const Graph p3 = path_graph(3);
  const ConstrainedEigenbasis eb = full_basis(p3);
  Eigen::MatrixXd X(3, 3);
  X << 1, 2, 3,
       4, 5, 6,
       7, 8, 9;
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd out =
      block_forward(eb.V, eb.R, constant_filter(1.0), X, W, false);
  REQUIRE((out - X).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the ramp filter reconstructs the laplacian") {
  const Graph p3 = path_graph(3);
  const ConstrainedEigenbasis eb = full_basis(p3);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd pre =
      block_forward(eb.V, eb.R, relu_identity_filter(), X, W, false);
  REQUIRE((pre - dense_laplacian(p3)).cwiseAbs().maxCoeff() < 1e-9);
  // With the activation the negative off-diagonals clip to zero.
  const Eigen::MatrixXd post =
      block_forward(eb.V, eb.R, relu_identity_filter(), X, W, true);
  Eigen::MatrixXd expect(3, 3);
  expect << 1, 0, 0,
            0, 2, 0,
            0, 0, 1;
  REQUIRE((post - expect).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("block_forward validates shapes") {
  const Graph p3 = path_graph(3);
  const ConstrainedEigenbasis eb = full_basis(p3);
  const FilterMLP f = constant_filter(1.0);
  REQUIRE_THROWS_AS(block_forward(eb.V, eb.R, f, Eigen::MatrixXd::Zero(4, 2),
                                  Eigen::MatrixXd::Zero(2, 2)),
                    ValidationError);
  REQUIRE_THROWS_AS(block_forward(eb.V, Eigen::VectorXd::Zero(2), f,
                                  Eigen::MatrixXd::Zero(3, 2),
                                  Eigen::MatrixXd::Zero(2, 2)),
                    ValidationError);
  REQUIRE_THROWS_AS(block_forward(eb.V, eb.R, f, Eigen::MatrixXd::Zero(3, 2),
                                  Eigen::MatrixXd::Zero(3, 2)),
                    ValidationError);
}

TEST_CASE("filter output at each eigenvalue depends only on that eigenvalue") {
  SpectralModel m = make_model({5, 4}, 3, 9);
  const FilterMLP& f = m.blocks[0].filter;
  Eigen::VectorXd r1(3), r2(3);
  r1 << 0.5, 1.5, 2.5;
  r2 << 0.5, 9.9, 2.5;
  const Eigen::VectorXd f1 = f(r1), f2 = f(r2);
  REQUIRE(f1[0] == f2[0]);
  REQUIRE(f1[2] == f2[2]);
  REQUIRE(f1[1] != f2[1]);
}

TEST_CASE("fresh models start near the plain spectral projection") {
  const SpectralModel m = make_model({5, 5}, 4, 2);
  REQUIRE(m.blocks[0].filter.b2 == 1.0);
  REQUIRE(m.blocks[0].filter.b1.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(m.head_b == 0.0);
  REQUIRE(m.head_w.size() == 4 * 5);
  REQUIRE_THROWS_AS(make_model({5}, 4, 2), ValidationError);
  REQUIRE_THROWS_AS(make_model({5, 5}, 0, 2), ValidationError);
  // Deterministic in the seed.
  const SpectralModel a = make_model({5, 8, 4}, 3, 7);
  const SpectralModel b = make_model({5, 8, 4}, 3, 7);
  REQUIRE(pack_params(a) == pack_params(b));
  const SpectralModel c = make_model({5, 8, 4}, 3, 8);
  REQUIRE(pack_params(a) != pack_params(c));
}

TEST_CASE("parameter packing round-trips and covers every group") {
  SpectralModel m = make_model({5, 8, 4}, 3, 11);
  const Eigen::VectorXd theta = pack_params(m);
  REQUIRE(theta.size() == num_params(m));
  const std::vector<ParameterGroup> groups = parameter_groups(m);
  int covered = 0;
  for (size_t i = 0; i < groups.size(); ++i) {
    REQUIRE(groups[i].offset == covered);
    covered += groups[i].size;
  }
  REQUIRE(covered == theta.size());
  // Perturb, unpack, repack: bitwise identical.
  Eigen::VectorXd moved = theta;
  for (int i = 0; i < moved.size(); ++i) moved[i] += 0.001 * (i % 7);
  unpack_params(m, moved);
  REQUIRE(pack_params(m) == moved);
  REQUIRE_THROWS_AS(unpack_params(m, Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST_CASE("forward produces calibrated probabilities") {
  LinkDataset ds = small_dataset();
  REQUIRE_FALSE(ds.train.empty());
  SpectralModel m = make_model({5, 8, 4}, 4, 5);
  for (const auto& inst : ds.train) {
    const double p = forward(m, inst);
    REQUIRE(p > 0.0);
    REQUIRE(p < 1.0);
    REQUIRE(p == forward(m, inst)); // deterministic
  }
  // A zeroed head is maximally uncertain.
  m.head_w.setZero();
  m.head_b = 0.0;
  REQUIRE(forward(m, ds.train.front()) == 0.5);
}

TEST_CASE("zero-padded eigenbasis columns are inert in the forward pass") {
  LinkDataset ds = small_dataset(ConstraintPolicy::Neumann, 8);
  const SpectralModel m = make_model({5, 8, 4}, 4, 5);
  bool exercised = false;
  for (auto& inst : ds.train) {
    const int keff = inst.eb.kappa_effective;
    if (keff == inst.eb.V.cols() || keff == 0) continue;
    LinkInstance stripped = inst;
    stripped.eb.V = inst.eb.V.leftCols(keff).eval();
    stripped.eb.R = inst.eb.R.head(keff).eval();
    REQUIRE(forward(m, stripped) == Catch::Approx(forward(m, inst)).epsilon(1e-12));
    exercised = true;
  }
  REQUIRE(exercised);
}

TEST_CASE("head gradients follow the closed form") {
  LinkDataset ds = small_dataset();
  SpectralModel m = make_model({5, 8, 4}, 4, 6);
  std::vector<const LinkInstance*> batch;
  for (const auto& inst : ds.train) batch.push_back(&inst);
  const auto [grad, loss] = gradients(m, batch);
  REQUIRE(std::isfinite(loss));

  double expect_gb = 0.0, expect_loss = 0.0;
  for (const LinkInstance* inst : batch) {
    const double p = forward(m, *inst);
    expect_gb += p - inst->label;
    expect_loss += bce_loss(p, inst->label);
  }
  expect_gb /= static_cast<double>(batch.size());
  expect_loss /= static_cast<double>(batch.size());
  REQUIRE(loss == Catch::Approx(expect_loss));
  const std::vector<ParameterGroup> groups = parameter_groups(m);
  const ParameterGroup& head_b = groups.back();
  REQUIRE(head_b.name == "head_b");
  REQUIRE(grad[head_b.offset] == Catch::Approx(expect_gb));
}

TEST_CASE("batch gradients are means over instances") {
  LinkDataset ds = small_dataset();
  SpectralModel m = make_model({5, 8, 4}, 4, 6);
  const LinkInstance* a = &ds.train[0];
  const LinkInstance* b = &ds.train[1];
  const auto [ga, la] = gradients(m, {a});
  const auto [gaa, laa] = gradients(m, {a, a});
  REQUIRE((ga - gaa).lpNorm<Eigen::Infinity>() < 1e-14);
  REQUIRE(la == Catch::Approx(laa));
  const auto [gb, lb] = gradients(m, {b});
  const auto [gab, lab] = gradients(m, {a, b});
  REQUIRE((0.5 * (ga + gb) - gab).lpNorm<Eigen::Infinity>() < 1e-12);
  REQUIRE(lab == Catch::Approx(0.5 * (la + lb)));
  REQUIRE_THROWS_AS(gradients(m, {}), ValidationError);
}

TEST_CASE("analytic gradients match central differences everywhere") {
  LinkDataset ds = small_dataset();
  SpectralModel m = make_model({5, 8, 4}, 4, 13);
  // Evaluate at a generic point: nudge every parameter off its initialization
  // so no activation sits exactly on a kink.
  Eigen::VectorXd theta = pack_params(m);
  Rng noise(99);
  for (int i = 0; i < theta.size(); ++i) theta[i] += 0.05 * noise.normal();
  unpack_params(m, theta);

  std::vector<const LinkInstance*> batch;
  for (size_t i = 0; i < 5 && i < ds.train.size(); ++i) batch.push_back(&ds.train[i]);
  REQUIRE(batch.size() == 5);

  const auto [grad, loss] = gradients(m, batch);
  const double h = 1e-5;
  auto loss_at = [&](const Eigen::VectorXd& t) {
    SpectralModel probe = m;
    unpack_params(probe, t);
    double total = 0.0;
    for (const LinkInstance* inst : batch)
      total += bce_loss(forward(probe, *inst), inst->label);
    return total / static_cast<double>(batch.size());
  };

  double worst = 0.0;
  for (int i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, dn = theta;
    up[i] += h;
    dn[i] -= h;
    const double fd = (loss_at(up) - loss_at(dn)) / (2.0 * h);
    const double rel = std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i]));
    worst = std::max(worst, rel);
  }
  INFO("worst relative gradient error " << worst);
  REQUIRE(worst <= 1e-4);
}

TEST_CASE("auc on separable, random, and tied scores") {
  REQUIRE(auc_score({0.9, 0.8}, {0.1, 0.2}) == 1.0);
  REQUIRE(auc_score({0.1, 0.2}, {0.9, 0.8}) == 0.0);
  REQUIRE(auc_score({0.8, 0.2}, {0.6, 0.4}) == 0.5);
  REQUIRE(auc_score({0.5}, {0.5}) == 0.5);
  REQUIRE(auc_score({0.7, 0.3, 0.3}, {0.3}) ==
          Catch::Approx(oracle::brute_auc({0.7, 0.3, 0.3}, {0.3})));
  REQUIRE_THROWS_AS(auc_score({}, {0.5}), ValidationError);
  REQUIRE_THROWS_AS(auc_score({0.5}, {}), ValidationError);
}

TEST_CASE("auc agrees with brute-force pair counting under heavy ties") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pos, neg;
    const int np = 3 + static_cast<int>(rng.below(8));
    const int nn = 3 + static_cast<int>(rng.below(8));
    // Quantized scores force tie groups.
    for (int i = 0; i < np; ++i) pos.push_back(rng.below(5) / 4.0);
    for (int i = 0; i < nn; ++i) neg.push_back(rng.below(5) / 4.0);
    REQUIRE(auc_score(pos, neg) ==
            Catch::Approx(oracle::brute_auc(pos, neg)).margin(1e-12));
  }
}

TEST_CASE("hits at k counts strict exceedance of the k-th negative") {
  REQUIRE(hits_at_k({0.9, 0.5, 0.3}, {0.8, 0.4, 0.2, 0.1}, 2) ==
          Catch::Approx(2.0 / 3.0));
  REQUIRE(hits_at_k({0.9, 0.5, 0.3}, {0.8, 0.4, 0.2, 0.1}, 1) ==
          Catch::Approx(1.0 / 3.0));
  // Fewer negatives than K: every positive counts as a hit.
  REQUIRE(hits_at_k({0.9, 0.1}, {0.5}, 10) == 1.0);
  // Ties with the threshold are not hits.
  REQUIRE(hits_at_k({0.4}, {0.4, 0.4}, 1) == 0.0);
  REQUIRE_THROWS_AS(hits_at_k({0.5}, {0.5}, 0), ValidationError);
  REQUIRE_THROWS_AS(hits_at_k({}, {0.5}, 1), ValidationError);
}

TEST_CASE("dataset split hides test edges from the observed graph") {
  const Graph g = erdos_renyi(30, 0.15, 17);
  DatasetConfig cfg;
  cfg.test_fraction = 0.15;
  cfg.seed = 3;
  const LinkDataset ds = make_link_dataset(g, cfg);
  const int m = static_cast<int>(g.edges.size());
  const int test_count = static_cast<int>(std::round(0.15 * m));
  REQUIRE(static_cast<int>(ds.test.size()) == 2 * test_count);
  REQUIRE(static_cast<int>(ds.train.size()) == 2 * (m - test_count));
  REQUIRE(static_cast<int>(ds.observed.edges.size()) == m - test_count);

  int pos = 0, neg = 0;
  for (const auto& inst : ds.test) {
    if (inst.label) {
      ++pos;
      REQUIRE(g.has_edge(inst.u, inst.v));
      REQUIRE_FALSE(ds.observed.has_edge(inst.u, inst.v)); // held out
    } else {
      ++neg;
      REQUIRE_FALSE(g.has_edge(inst.u, inst.v));
    }
  }
  REQUIRE(pos == test_count);
  REQUIRE(neg == test_count);
  for (const auto& inst : ds.train)
    if (inst.label) REQUIRE(ds.observed.has_edge(inst.u, inst.v));

  // Deterministic rebuild.
  const LinkDataset again = make_link_dataset(g, cfg);
  REQUIRE(again.observed.edges == ds.observed.edges);
  REQUIRE(again.train.size() == ds.train.size());
  for (size_t i = 0; i < ds.train.size(); ++i) {
    REQUIRE(again.train[i].u == ds.train[i].u);
    REQUIRE(again.train[i].v == ds.train[i].v);
    REQUIRE(again.train[i].eb.R == ds.train[i].eb.R);
  }
}

TEST_CASE("dataset split rejects graphs with too few training edges") {
  const Graph c6 = cycle_graph(6);
  DatasetConfig cfg;
  cfg.test_fraction = 0.5;
  REQUIRE_THROWS_AS(make_link_dataset(c6, cfg), ValidationError);
  DatasetConfig bad = cfg;
  bad.test_fraction = 1.5;
  REQUIRE_THROWS_AS(make_link_dataset(c6, bad), ValidationError);
  // Too dense to find enough non-edges.
  REQUIRE_THROWS_AS(make_link_dataset(complete_graph(8), DatasetConfig{}),
                    ValidationError);
}

TEST_CASE("per-class caps limit the instance counts") {
  const LinkDataset ds = small_dataset();
  REQUIRE(ds.train.size() == 24); // 12 per class
  REQUIRE(ds.test.size() == 12);  // 6 per class
}

TEST_CASE("initial features encode query, hop, and degree") {
  const Graph c6 = cycle_graph(6);
  const EnclosingSubgraph sub = extract_enclosing_subgraph(c6, 0, 1);
  const Eigen::MatrixXd X = initial_features(sub, c6);
  REQUIRE(X.rows() == 6);
  REQUIRE(X.cols() == 5);
  Eigen::RowVectorXd query(5), interior(5), boundary(5);
  query << 1, 1, 0, 0, 2;    // indicator 1, hop 0, parent degree 2
  interior << 0, 0, 1, 0, 2; // hop-1 shell
  boundary << 0, 0, 0, 1, 2; // hop-2 shell
  REQUIRE(X.row(0) == query);
  REQUIRE(X.row(2) == interior);
  REQUIRE(X.row(4) == boundary);
}

TEST_CASE("instance constraints follow the policy") {
  const Graph c6 = cycle_graph(6);
  const EnclosingSubgraph sub = extract_enclosing_subgraph(c6, 0, 1);
  REQUIRE(instance_constraints(sub, c6, ConstraintPolicy::None, 0, 1).empty());
  const ConstraintMatrix neu =
      instance_constraints(sub, c6, ConstraintPolicy::Neumann, 0, 1);
  REQUIRE(neu.l() == 2);
  REQUIRE(neu.columns[0].provenance == Provenance::NeumannBoundary);
  REQUIRE(neu.columns[1].provenance == Provenance::DegreeSum);
  const ConstraintMatrix vd =
      instance_constraints(sub, c6, ConstraintPolicy::VertexDeleted, 2, 1);
  REQUIRE(vd.l() >= 1);
  REQUIRE(vd.l() <= 2);
  for (const auto& col : vd.columns)
    REQUIRE(col.provenance == Provenance::VertexDeleted);
}

TEST_CASE("vertex-deleted refresh is seed-driven") {
  const Graph g = erdos_renyi(20, 0.25, 9);
  LinkInstance inst = build_link_instance(g, g.edges[0].first, g.edges[0].second, 1,
                                          ConstraintPolicy::VertexDeleted, 6, 2, 41);
  const Eigen::VectorXd r1 = inst.eb.R;
  refresh_eigenbasis(inst, g, ConstraintPolicy::VertexDeleted, 6, 2, 41);
  REQUIRE(inst.eb.R == r1); // same seed, same basis
  refresh_eigenbasis(inst, g, ConstraintPolicy::VertexDeleted, 6, 2, 42);
  REQUIRE(inst.eb.R != r1); // fresh seed, fresh deletions
}

TEST_CASE("training with zero learning rate leaves the model fixed") {
  LinkDataset ds = small_dataset();
  SpectralModel m = make_model({5, 8, 4}, 4, 21);
  const Eigen::VectorXd before = pack_params(m);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 2;
  cfg.hits_k = 3;
  const TrainResult res = train(m, ds, cfg);
  REQUIRE(pack_params(m) == before);
  REQUIRE(res.history.size() == 2);
  REQUIRE(res.history[0].loss == Catch::Approx(res.history[1].loss));
  for (const auto& em : res.history) {
    REQUIRE(em.auc >= 0.0);
    REQUIRE(em.auc <= 1.0);
    REQUIRE(em.hits >= 0.0);
    REQUIRE(em.hits <= 1.0);
  }
}

TEST_CASE("training is reproducible per seed") {
  LinkDataset ds1 = small_dataset();
  LinkDataset ds2 = small_dataset();
  SpectralModel m1 = make_model({5, 8, 4}, 4, 22);
  SpectralModel m2 = make_model({5, 8, 4}, 4, 22);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.epochs = 3;
  cfg.seed = 5;
  cfg.hits_k = 3;
  const TrainResult r1 = train(m1, ds1, cfg);
  const TrainResult r2 = train(m2, ds2, cfg);
  REQUIRE(pack_params(m1) == pack_params(m2));
  for (size_t i = 0; i < r1.history.size(); ++i) {
    REQUIRE(r1.history[i].loss == r2.history[i].loss);
    REQUIRE(r1.history[i].auc == r2.history[i].auc);
  }
}

TEST_CASE("full-batch descent reduces the training loss") {
  LinkDataset ds = small_dataset();
  SpectralModel m = make_model({5, 8, 4}, 4, 23);
  TrainConfig cfg;
  cfg.lr = 0.05;
  cfg.epochs = 8;
  cfg.hits_k = 3;
  const TrainResult res = train(m, ds, cfg);
  REQUIRE(res.history.back().loss < res.history.front().loss);
}

TEST_CASE("adam takes a different path than plain descent") {
  LinkDataset ds1 = small_dataset();
  LinkDataset ds2 = small_dataset();
  SpectralModel gd = make_model({5, 8, 4}, 4, 24);
  SpectralModel adam = make_model({5, 8, 4}, 4, 24);
  TrainConfig cfg;
  cfg.lr = 0.01;
  cfg.epochs = 2;
  cfg.hits_k = 3;
  train(gd, ds1, cfg);
  cfg.optimizer = "adam";
  cfg.batch_size = 8;
  train(adam, ds2, cfg);
  REQUIRE(pack_params(gd) != pack_params(adam));
  TrainConfig bad;
  bad.optimizer = "banana";
  SpectralModel m = make_model({5, 8, 4}, 4, 24);
  REQUIRE_THROWS_AS(train(m, ds1, bad), ValidationError);
}

TEST_CASE("metrics csv lists one row per epoch") {
  TrainResult res;
  res.history.push_back({1, 0.5, 0.75, 0.25});
  res.history.push_back({2, 0.25, 0.875, 0.5});
  std::ostringstream out;
  write_metrics_csv(out, res);
  const std::string text = out.str();
  REQUIRE(text.rfind("epoch,loss,auc,hits_at_k\n", 0) == 0);
  REQUIRE(text.find("1,0.5,0.75,0.25\n") != std::string::npos);
  REQUIRE(text.find("2,0.25,0.875,0.5\n") != std::string::npos);
}

TEST_CASE("checkpoints restore the exact parameter vector") {
  SpectralModel m = make_model({5, 8, 4}, 4, 29);
  Eigen::VectorXd theta = pack_params(m);
  for (int i = 0; i < theta.size(); ++i) theta[i] += std::sin(i) * 0.1;
  unpack_params(m, theta);

  std::ostringstream out;
  write_checkpoint(out, m, {{"policy", "neumann"}, {"kappa", "6"}});
  const std::string text = out.str();
  REQUIRE(text.rfind("llwlc-checkpoint v1\n", 0) == 0);
  REQUIRE(text.find("# policy=neumann\n") != std::string::npos);
  REQUIRE(text.find("# kappa=6\n") != std::string::npos);
  REQUIRE(text.find("end\n") != std::string::npos);

  const SpectralModel back = parse_checkpoint(text);
  REQUIRE(pack_params(back) == pack_params(m));
  REQUIRE(back.pool_k == m.pool_k);
  REQUIRE(back.blocks.size() == m.blocks.size());

  std::ostringstream again;
  write_checkpoint(again, back, {{"policy", "neumann"}, {"kappa", "6"}});
  REQUIRE(again.str() == text);
}

TEST_CASE("checkpoint parser rejects corrupt input") {
  REQUIRE_THROWS_AS(parse_checkpoint("not a checkpoint\n"), ParseError);
  REQUIRE_THROWS_AS(parse_checkpoint("llwlc-checkpoint v1\npool_k 3\n"), ParseError);
  SpectralModel m = make_model({5, 4}, 3, 1);
  std::ostringstream out;
  write_checkpoint(out, m);
  std::string text = out.str();
  text.resize(text.size() / 2); // truncate mid-tensor
  REQUIRE_THROWS_AS(parse_checkpoint(text), ParseError);
}
