// matinfo: matrix-information metrics, collapse verification and desk-scale
// training over feature/weight matrices.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
// 3 data-invariant violation.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "matinfo/collapse.hpp"
#include "matinfo/io.hpp"
#include "matinfo/linalg.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/trainer.hpp"
#include "matinfo/verify.hpp"

namespace {

using namespace matinfo;

int worker_threads() {
  const char* env = std::getenv("MATINFO_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

void print_scalar(double value) { std::printf("%.12f\n", value); }

GramMatrix load_gram(const std::string& path, bool as_gram) {
  const Eigen::MatrixXd m = read_matrix_file(path);
  if (as_gram) return GramMatrix(m);
  return gram(FeatureMatrix(m));
}

struct MetricArgs {
  std::vector<std::string> inputs;
  bool as_gram = false;
};

struct TrainArgs {
  std::string dataset = "blobs";
  int classes = 10;
  int input_dim = 32;
  int n_per_class = 200;
  double separation = 4.0;
  double noise = 1.0;
  int modulus = 113;
  double train_fraction = 0.3;
  std::string loss = "ce";
  double lambda = 0.5;
  double temperature = 1.0;
  std::string optimizer = "sgd";
  double lr = 0.03;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 64;
  long steps = 2000;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;
  bool data_seed_set = false;
  std::vector<int> hidden = {128, 128};
  std::string head = "linear";
  long eval_every = 0;
  int eval_batch = 256;
  bool no_info_weight_grad = false;
  std::string log_path;
  std::string ckpt_path;
};

TrainConfig to_config(const TrainArgs& args) {
  TrainConfig cfg;
  if (args.dataset == "blobs") {
    cfg.dataset.kind = DatasetSpec::Kind::blobs;
    cfg.dataset.blobs = {args.classes, args.input_dim, args.n_per_class, args.separation,
                         args.noise};
  } else {
    cfg.dataset.kind = DatasetSpec::Kind::modadd;
    cfg.dataset.modadd = {args.modulus, args.train_fraction};
  }

  if (args.loss == "ce") cfg.loss = LossKind::ce;
  else if (args.loss == "ce+mi") cfg.loss = LossKind::ce_mi;
  else if (args.loss == "ce+hd") cfg.loss = LossKind::ce_hd;
  else cfg.loss = LossKind::ce_cma;

  cfg.lambda = cfg.loss == LossKind::ce ? 0.0 : args.lambda;
  if (cfg.lambda < 0.0) throw ParseError("--lambda must be nonnegative");
  if (cfg.loss == LossKind::ce_cma && cfg.lambda > 1.0) {
    throw ParseError("--lambda must lie in [0, 1] for ce+cma");
  }
  if (args.temperature <= 0.0) throw ParseError("--temperature must be positive");
  if (args.steps < 0) throw ParseError("--steps must be nonnegative");

  cfg.temperature = args.temperature;
  cfg.optimizer = args.optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adamw;
  cfg.lr0 = args.lr;
  cfg.momentum = args.momentum;
  cfg.weight_decay = args.weight_decay;
  cfg.batch_size = args.batch_size;
  cfg.steps = args.steps;
  cfg.seed = args.seed;
  cfg.data_seed = args.data_seed_set ? args.data_seed : args.seed;
  cfg.hidden_dims = args.hidden;
  cfg.head = args.head == "linear" ? HeadKind::linear : HeadKind::cosine;
  cfg.eval_every = args.eval_every;
  cfg.eval_batch = args.eval_batch;
  cfg.info_grad_to_weights = !args.no_info_weight_grad;
  return cfg;
}

int run_metric(const std::string& name, const MetricArgs& args) {
  if (name == "entropy") {
    print_scalar(matrix_entropy(load_gram(args.inputs[0], args.as_gram)));
  } else if (name == "erank") {
    if (args.as_gram) {
      const GramMatrix k(read_matrix_file(args.inputs[0]));
      print_scalar(effective_rank(FeatureMatrix(k.data())));
    } else {
      print_scalar(effective_rank(FeatureMatrix(read_matrix_file(args.inputs[0]))));
    }
  } else {
    const GramMatrix k1 = load_gram(args.inputs[0], args.as_gram);
    const GramMatrix k2 = load_gram(args.inputs[1], args.as_gram);
    if (name == "mi") print_scalar(matrix_mi(k1, k2));
    else if (name == "mir") print_scalar(mir(k1, k2));
    else print_scalar(hdr(k1, k2));
  }
  return 0;
}

int run_verify(const std::string& suite, int instances, std::uint64_t seed) {
  SuiteResult result;
  if (suite == "nc") result = run_nc_suite(instances, seed);
  else if (suite == "lemmas") result = run_lemma_suite(instances, seed);
  else result = run_gradient_suite(instances, seed);

  for (const std::string& line : result.diagnostics) std::cerr << line << '\n';
  std::printf("%s suite: %d/%d instances passed", suite.c_str(),
              result.instances - result.failures, result.instances);
  if (suite == "gradients") std::printf(", max rel err %.3e", result.max_rel_err);
  std::printf("\n");
  return result.failures == 0 ? 0 : 1;
}

int run_train(const TrainArgs& args) {
  const TrainConfig cfg = to_config(args);
  std::ofstream log;
  if (!args.log_path.empty()) {
    log.open(args.log_path);
    if (!log) throw ParseError("cannot write " + args.log_path);
  }
  const Checkpoint ckpt = train(cfg, log.is_open() ? &log : nullptr);
  if (!args.ckpt_path.empty()) save_checkpoint(args.ckpt_path, ckpt);
  return 0;
}

int run_interpolate(const std::string& path_a, const std::string& path_b, int steps,
                    const std::string& out_path) {
  if (steps < 1) throw ParseError("--steps must be at least 1");
  const Checkpoint a = load_checkpoint(path_a);
  const Checkpoint b = load_checkpoint(path_b);
  const FeatureMatrix eval_data = eval_batches(a.config).second;

  std::vector<double> omegas(steps + 1);
  for (int i = 0; i <= steps; ++i) omegas[i] = static_cast<double>(i) / steps;
  const std::vector<MetricRecord> records =
      interpolate(a, b, omegas, eval_data, worker_threads());

  std::ofstream out(out_path);
  if (!out) throw ParseError("cannot write " + out_path);
  out << "omega,accuracy,mir,hdr\n";
  char line[160];
  for (int i = 0; i <= steps; ++i) {
    std::snprintf(line, sizeof(line), "%.4f,%.12f,%.12f,%.12f\n", omegas[i],
                  records[i].accuracy, records[i].mir, records[i].hdr);
    out << line;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix information metrics over feature and weight matrices"};
  app.require_subcommand(1);

  MetricArgs metric_args;
  for (const std::string name : {"entropy", "erank", "mi", "mir", "hdr"}) {
    const bool pair = name == "mi" || name == "mir" || name == "hdr";
    CLI::App* sub = app.add_subcommand(
        name, pair ? "Pairwise metric of two matrix files" : "Metric of one matrix file");
    sub->add_option("inputs", metric_args.inputs, "matrix files (.npy or .csv)")
        ->expected(pair ? 2 : 1)
        ->required();
    sub->add_flag("--as-gram", metric_args.as_gram,
                  "inputs already hold validated N x N Gram matrices");
  }

  int etf_classes = 10, etf_dim = 64;
  std::uint64_t etf_seed = 0;
  std::string etf_out;
  CLI::App* etf_cmd = app.add_subcommand("etf", "Write a simplex ETF frame as npy");
  etf_cmd->add_option("--classes", etf_classes)->required();
  etf_cmd->add_option("--dim", etf_dim)->required();
  etf_cmd->add_option("--seed", etf_seed);
  etf_cmd->add_option("--out", etf_out)->required();

  std::string nc_features, nc_labels, nc_weights;
  CLI::App* nc_cmd = app.add_subcommand("nc-check", "Collapse residual report as JSON");
  nc_cmd->add_option("--features", nc_features)->required();
  nc_cmd->add_option("--labels", nc_labels)->required();
  nc_cmd->add_option("--weights", nc_weights)->required();

  std::string verify_suite;
  int verify_instances = 50;
  std::uint64_t verify_seed = 0;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run a seeded property suite");
  verify_cmd->add_option("--suite", verify_suite)
      ->check(CLI::IsMember({"nc", "lemmas", "gradients"}))
      ->required();
  verify_cmd->add_option("--instances", verify_instances)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", verify_seed);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a classifier with metric logging");
  train_cmd->add_option("--dataset", train_args.dataset)
      ->check(CLI::IsMember({"blobs", "modadd"}));
  train_cmd->add_option("--classes", train_args.classes);
  train_cmd->add_option("--input-dim", train_args.input_dim);
  train_cmd->add_option("--n-per-class", train_args.n_per_class);
  train_cmd->add_option("--separation", train_args.separation);
  train_cmd->add_option("--noise", train_args.noise);
  train_cmd->add_option("--p", train_args.modulus);
  train_cmd->add_option("--train-fraction", train_args.train_fraction);
  train_cmd->add_option("--loss", train_args.loss)
      ->check(CLI::IsMember({"ce", "ce+mi", "ce+hd", "ce+cma"}));
  train_cmd->add_option("--lambda", train_args.lambda);
  train_cmd->add_option("--temperature", train_args.temperature);
  train_cmd->add_option("--optimizer", train_args.optimizer)
      ->check(CLI::IsMember({"sgd", "adamw"}));
  train_cmd->add_option("--lr", train_args.lr);
  train_cmd->add_option("--momentum", train_args.momentum);
  train_cmd->add_option("--weight-decay", train_args.weight_decay);
  train_cmd->add_option("--batch-size", train_args.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", train_args.steps);
  train_cmd->add_option("--seed", train_args.seed);
  CLI::Option* data_seed_opt = train_cmd->add_option("--data-seed", train_args.data_seed,
                                                     "batch-order seed (defaults to --seed)");
  train_cmd->add_option("--hidden", train_args.hidden, "hidden layer widths");
  train_cmd->add_option("--head", train_args.head)->check(CLI::IsMember({"linear", "cosine"}));
  train_cmd->add_option("--eval-every", train_args.eval_every);
  train_cmd->add_option("--eval-batch", train_args.eval_batch)->check(CLI::PositiveNumber);
  train_cmd->add_flag("--no-info-weight-grad", train_args.no_info_weight_grad,
                      "keep info-loss gradients out of the classifier head");
  train_cmd->add_option("--log", train_args.log_path, "JSONL metrics output");
  train_cmd->add_option("--ckpt-out", train_args.ckpt_path, "checkpoint output");

  std::string interp_a, interp_b, interp_out;
  int interp_steps = 20;
  CLI::App* interp_cmd =
      app.add_subcommand("interpolate", "Evaluate the line between two checkpoints");
  interp_cmd->add_option("--ckpt-a", interp_a)->required();
  interp_cmd->add_option("--ckpt-b", interp_b)->required();
  interp_cmd->add_option("--steps", interp_steps);
  interp_cmd->add_option("--out", interp_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const std::string name : {"entropy", "erank", "mi", "mir", "hdr"}) {
      if (app.get_subcommand(name)->parsed()) return run_metric(name, metric_args);
    }
    if (etf_cmd->parsed()) {
      write_npy(etf_out, simplex_etf(etf_classes, etf_dim, etf_seed).data());
      return 0;
    }
    if (nc_cmd->parsed()) {
      const FeatureMatrix features(read_matrix_file(nc_features), read_labels(nc_labels));
      const FeatureMatrix weights(read_matrix_file(nc_weights));
      std::cout << nc_report_to_json(nc_check(features, weights)) << '\n';
      return 0;
    }
    if (verify_cmd->parsed()) return run_verify(verify_suite, verify_instances, verify_seed);
    if (train_cmd->parsed()) {
      train_args.data_seed_set = data_seed_opt->count() > 0;
      return run_train(train_args);
    }
    if (interp_cmd->parsed()) {
      return run_interpolate(interp_a, interp_b, interp_steps, interp_out);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
