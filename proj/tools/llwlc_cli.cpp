// Command-line front end: eigensolves, expressivity verdicts, link-prediction
// training, and numerical verification of the solver's approximation bounds.
//
// Exit codes: 0 success, 1 input/usage error, 2 numerical degeneracy,
// 3 verification failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "llwlc/llwlc.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw llwlc::ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw llwlc::ValidationError("cannot write file: " + out_path);
  out << text;
}

struct Options {
  std::string graph, graph2, out;
  std::string policy = "none";
  std::string format = "text";
  std::string optimizer = "gd";
  int k = 10;
  int kappa = 10;
  std::vector<int> query;
  uint64_t seed = 1;
  int epochs = 20;
  double lr = 0.001;
  double split = 0.1;
  int batch = 0;
  int max_train_per_class = 0;
  int max_test_per_class = 0;
  double inject_lhs_inflation = 0.0;
  int corpus = 50;
};

int cmd_eig(const Options& opt) {
  const llwlc::Graph g = llwlc::parse_edge_list(slurp(opt.graph));
  const llwlc::ConstraintPolicy policy = llwlc::parse_policy(opt.policy);

  llwlc::ConstraintMatrix C;
  const llwlc::Graph* target = &g;
  llwlc::EnclosingSubgraph sub;
  if (policy == llwlc::ConstraintPolicy::Neumann) {
    if (opt.query.size() != 2)
      throw llwlc::ValidationError("--policy neumann requires --query u v");
    sub = llwlc::extract_enclosing_subgraph(g, opt.query[0], opt.query[1]);
    C = llwlc::instance_constraints(sub, g, policy, opt.k, opt.seed);
    target = &sub.local;
  } else if (policy == llwlc::ConstraintPolicy::VertexDeleted) {
    std::vector<llwlc::ConstraintColumn> cols;
    for (int v : llwlc::stochastic_select(g, std::min(opt.k, g.n), opt.seed)) {
      try {
        cols.push_back(llwlc::vertex_deleted_column(g, v));
      } catch (const llwlc::EmptyConstraintError&) {}
    }
    C = llwlc::assemble(cols, g.n);
  } else {
    C.n = g.n;
  }

  llwlc::SolveOptions sopts;
  sopts.kappa_target = opt.kappa;
  sopts.steps = opt.kappa;
  sopts.seed = opt.seed;
  sopts.deflate_restarts = true;
  const llwlc::ConstrainedEigenbasis eb = llwlc::solve_eigenbasis(*target, C, sopts);

  std::ostringstream ss;
  llwlc::write_eigenbasis(ss, eb);
  emit(opt.out, ss.str());
  return 0;
}

int cmd_distinguish(const Options& opt) {
  const llwlc::Graph g1 = llwlc::parse_edge_list(slurp(opt.graph));
  const llwlc::Graph g2 = llwlc::parse_edge_list(slurp(opt.graph2));

  llwlc::SignaturePolicy spolicy;
  const llwlc::ConstraintPolicy policy = llwlc::parse_policy(opt.policy);
  if (policy == llwlc::ConstraintPolicy::Neumann)
    spolicy = llwlc::SignaturePolicy::neumann_per_edge();
  else if (policy == llwlc::ConstraintPolicy::VertexDeleted)
    spolicy = llwlc::SignaturePolicy::vertex_deleted_sample(opt.k, opt.seed);
  else
    throw llwlc::ValidationError("distinguish requires --policy neumann or vdel");

  const bool wl = llwlc::wl1_distinguish(g1, g2);
  const llwlc::SpectralSignature s1 =
      llwlc::llwlc_signature(g1, spolicy, opt.kappa, 1e-6, opt.seed);
  const llwlc::SpectralSignature s2 =
      llwlc::llwlc_signature(g2, spolicy, opt.kappa, 1e-6, opt.seed);
  const double gap = llwlc::signature_gap(s1, s2);

  std::ostringstream ss;
  ss << "WL1: " << (wl ? "DISTINGUISHED" : "INDISTINGUISHABLE") << "\n";
  if (llwlc::signatures_distinguish(s1, s2)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", gap);
    ss << "LLwLC: DISTINGUISHED gap=" << buf << "\n";
  } else {
    ss << "LLwLC: INDISTINGUISHABLE\n";
  }
  ss << "--- signatures graph 1 ---\n";
  llwlc::write_signature(ss, s1);
  ss << "--- signatures graph 2 ---\n";
  llwlc::write_signature(ss, s2);
  llwlc::write_verdict(ss, gap);
  emit(opt.out, ss.str());
  return 0;
}

int cmd_lp(const Options& opt) {
  const llwlc::Graph g = llwlc::parse_edge_list(slurp(opt.graph));

  llwlc::DatasetConfig dcfg;
  dcfg.test_fraction = opt.split;
  dcfg.seed = opt.seed;
  dcfg.policy = llwlc::parse_policy(opt.policy);
  dcfg.kappa_target = opt.kappa;
  dcfg.vdel_k = opt.k;
  dcfg.max_train_per_class = opt.max_train_per_class;
  dcfg.max_test_per_class = opt.max_test_per_class;
  llwlc::LinkDataset ds = llwlc::make_link_dataset(g, dcfg);

  llwlc::SpectralModel model = llwlc::make_model({5, 32, 32}, 10, opt.seed);
  llwlc::TrainConfig tcfg;
  tcfg.lr = opt.lr;
  tcfg.epochs = opt.epochs;
  tcfg.kappa_target = opt.kappa;
  tcfg.seed = opt.seed;
  tcfg.policy = dcfg.policy;
  tcfg.vdel_k = opt.k;
  tcfg.optimizer = opt.optimizer;
  tcfg.batch_size = opt.batch;
  const llwlc::TrainResult result = llwlc::train(model, ds, tcfg);

  std::ostringstream csv;
  llwlc::write_metrics_csv(csv, result);
  emit(opt.out, csv.str());
  if (!opt.out.empty()) {
    std::ostringstream ckpt;
    llwlc::write_checkpoint(ckpt, model,
                            {{"policy", llwlc::policy_name(tcfg.policy)},
                             {"lr", std::to_string(tcfg.lr)},
                             {"epochs", std::to_string(tcfg.epochs)},
                             {"seed", std::to_string(tcfg.seed)},
                             {"optimizer", tcfg.optimizer}});
    emit(opt.out + ".ckpt", ckpt.str());
  }
  return 0;
}

int cmd_verify(const Options& opt) {
  const llwlc::BoundCorpusResult t2 =
      llwlc::run_bound_corpus(opt.corpus, opt.seed, opt.inject_lhs_inflation);
  const llwlc::PerturbationCorpusResult t1 =
      llwlc::run_perturbation_corpus(std::max(5, opt.corpus / 5), opt.seed);

  std::ostringstream ss;
  if (opt.format == "csv") {
    llwlc::write_bound_corpus_csv(ss, t2);
  } else {
    ss << "low-rank bound corpus: " << t2.conclusive << " conclusive, "
       << t2.inconclusive << " inconclusive, " << t2.violations << " violations";
    if (t2.conclusive > 0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", t2.min_slack);
      ss << ", min slack " << buf;
    }
    ss << "\n";
    for (size_t i = 0; i < t2.reports.size(); ++i) {
      if (!t2.reports[i].inconclusive && t2.reports[i].slack < -1e-8) {
        ss << "--- violating case " << i << " ---\n";
        llwlc::write_bound_report(ss, t2.reports[i]);
      }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", t1.median_ratio);
    ss << "perturbation corpus: " << t1.conclusive << " conclusive of " << t1.total
       << ", median discrepancy ratio at 10x scale drop " << buf << "\n";
  }
  emit(opt.out, ss.str());
  return t2.violations > 0 ? 3 : 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained spectral graph encodings: eigensolves, expressivity "
               "tests, link prediction, and bound verification"};
  app.require_subcommand(1);

  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_graph) {
    if (needs_graph)
      sub->add_option("--graph", opt.graph, "edge-list file")->required();
    sub->add_option("--policy", opt.policy, "constraint policy")
        ->check(CLI::IsMember({"none", "neumann", "vdel"}));
    sub->add_option("--k", opt.k, "vertex-deleted constraint count");
    sub->add_option("--kappa", opt.kappa, "eigenpair cap");
    sub->add_option("--seed", opt.seed, "deterministic seed");
    sub->add_option("--out", opt.out, "output path (default stdout)");
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"text", "csv"}));
  };

  CLI::App* eig = app.add_subcommand("eig", "solve a constrained eigenproblem");
  add_common(eig, true);
  eig->add_option("--query", opt.query, "link endpoints u v")->expected(2);

  CLI::App* dist = app.add_subcommand("distinguish", "1-WL and spectral-signature verdicts");
  add_common(dist, true);
  dist->add_option("--graph2", opt.graph2, "second edge-list file")->required();

  CLI::App* lp = app.add_subcommand("lp", "train link prediction on held-out edges");
  add_common(lp, true);
  lp->add_option("--epochs", opt.epochs, "training epochs");
  lp->add_option("--lr", opt.lr, "learning rate");
  lp->add_option("--split", opt.split, "held-out test fraction");
  lp->add_option("--optimizer", opt.optimizer, "gd or adam")
      ->check(CLI::IsMember({"gd", "adam"}));
  lp->add_option("--batch", opt.batch, "minibatch size (0 = full batch)");
  lp->add_option("--max-train-per-class", opt.max_train_per_class,
                 "cap train instances per class (0 = all)");
  lp->add_option("--max-test-per-class", opt.max_test_per_class,
                 "cap test instances per class (0 = all)");

  CLI::App* verify = app.add_subcommand("verify", "run the approximation-bound corpora");
  add_common(verify, false);
  verify->add_option("--corpus", opt.corpus, "corpus size");
  verify->add_option("--inject-lhs-inflation", opt.inject_lhs_inflation,
                     "fault-injection test hook")
      ->group(""); // hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (eig->parsed()) return cmd_eig(opt);
    if (dist->parsed()) return cmd_distinguish(opt);
    if (lp->parsed()) return cmd_lp(opt);
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const llwlc::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const llwlc::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const llwlc::NumericalError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << "\n";
    return 2;
  } catch (const llwlc::EmptyConstraintError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
