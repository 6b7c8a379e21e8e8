#include "matinfo/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "matinfo/collapse.hpp"
#include "matinfo/io.hpp"
#include "matinfo/linalg.hpp"
#include "matinfo/losses.hpp"

namespace matinfo {

namespace {

constexpr double kZeroNorm = 1e-12;

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per hidden layer
  std::vector<Eigen::MatrixXd> post;  // post-ReLU activations; post.back() = features
  Eigen::MatrixXd logits;
};

// logits -> (probabilities, log-probabilities) with the temperature applied,
// stable under large logits.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> softmax_t(const Eigen::MatrixXd& logits,
                                                      double temperature) {
  Eigen::MatrixXd scaled = logits / temperature;
  Eigen::MatrixXd probs(scaled.rows(), scaled.cols());
  Eigen::MatrixXd logprobs(scaled.rows(), scaled.cols());
  for (long j = 0; j < scaled.cols(); ++j) {
    const double shift = scaled.col(j).maxCoeff();
    const Eigen::VectorXd centered = scaled.col(j).array() - shift;
    const double total = centered.array().exp().sum();
    logprobs.col(j) = centered.array() - std::log(total);
    probs.col(j) = logprobs.col(j).array().exp();
  }
  return {std::move(probs), std::move(logprobs)};
}

ForwardCache run_forward(const ModelParams& params, const Eigen::MatrixXd& x) {
  if (x.rows() != params.arch.input_dim) {
    throw DimensionMismatch(x.rows(), params.arch.input_dim);
  }
  ForwardCache cache;
  const std::size_t hidden = params.arch.hidden_dims.size();
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < hidden; ++l) {
    Eigen::MatrixXd a = (params.weights[l] * h).colwise() + params.biases[l];
    cache.pre.push_back(a);
    cache.post.push_back(a.cwiseMax(0.0));
    h = cache.post.back();
  }
  if (hidden == 0) cache.post.push_back(x);

  const Eigen::MatrixXd& head_w = params.weights[hidden];
  const Eigen::VectorXd& head_b = params.biases[hidden];
  const Eigen::MatrixXd& f = cache.post.back();
  if (params.arch.head == HeadKind::linear) {
    cache.logits = (head_w * f).colwise() + head_b;
  } else {
    // Cosine similarities between head rows and feature columns; zero-norm
    // vectors get zero similarity.
    Eigen::MatrixXd what = head_w;
    for (long r = 0; r < what.rows(); ++r) {
      const double n = what.row(r).norm();
      if (n > kZeroNorm) what.row(r) /= n;
      else what.row(r).setZero();
    }
    Eigen::MatrixXd fhat = f;
    for (long j = 0; j < fhat.cols(); ++j) {
      const double n = fhat.col(j).norm();
      if (n > kZeroNorm) fhat.col(j) /= n;
      else fhat.col(j).setZero();
    }
    cache.logits = what * fhat;
  }
  if (!cache.logits.allFinite() || !cache.post.back().allFinite()) {
    throw NonFiniteActivation();
  }
  return cache;
}

// d x C class-vector matrix (one column per class).
Eigen::MatrixXd class_vectors(const ModelParams& params) {
  return params.weights.back().transpose();
}

struct BatchGradients {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

// Gradient of the logits w.r.t. the features, pushed back through the head.
// Fills dw/db entries of the head layer and returns dL/df.
Eigen::MatrixXd head_backward(const ModelParams& params, const ForwardCache& cache,
                              const Eigen::MatrixXd& dlogits, Eigen::MatrixXd& dw_head,
                              Eigen::VectorXd& db_head) {
  const std::size_t hidden = params.arch.hidden_dims.size();
  const Eigen::MatrixXd& head_w = params.weights[hidden];
  const Eigen::MatrixXd& f = cache.post.back();

  if (params.arch.head == HeadKind::linear) {
    dw_head = dlogits * f.transpose();
    db_head = dlogits.rowwise().sum();
    return head_w.transpose() * dlogits;
  }

  Eigen::MatrixXd what = head_w;
  Eigen::VectorXd wnorms(head_w.rows());
  for (long r = 0; r < what.rows(); ++r) {
    wnorms[r] = what.row(r).norm();
    if (wnorms[r] > kZeroNorm) what.row(r) /= wnorms[r];
    else what.row(r).setZero();
  }
  Eigen::MatrixXd fhat = f;
  Eigen::VectorXd fnorms(f.cols());
  for (long j = 0; j < fhat.cols(); ++j) {
    fnorms[j] = fhat.col(j).norm();
    if (fnorms[j] > kZeroNorm) fhat.col(j) /= fnorms[j];
    else fhat.col(j).setZero();
  }

  const Eigen::MatrixXd dwhat = dlogits * fhat.transpose();
  const Eigen::MatrixXd dfhat = what.transpose() * dlogits;

  dw_head.setZero(head_w.rows(), head_w.cols());
  for (long r = 0; r < head_w.rows(); ++r) {
    if (wnorms[r] <= kZeroNorm) continue;
    const Eigen::RowVectorXd wr = what.row(r);
    dw_head.row(r) = (dwhat.row(r) - wr.dot(dwhat.row(r)) * wr) / wnorms[r];
  }
  db_head.setZero(head_w.rows());

  Eigen::MatrixXd df = Eigen::MatrixXd::Zero(f.rows(), f.cols());
  for (long j = 0; j < f.cols(); ++j) {
    if (fnorms[j] <= kZeroNorm) continue;
    const Eigen::VectorXd fj = fhat.col(j);
    df.col(j) = (dfhat.col(j) - fj.dot(dfhat.col(j)) * fj) / fnorms[j];
  }
  return df;
}

// Columns of the batch whose features have usable norms; info losses skip the
// rest (a dead-ReLU zero feature has no cosine geometry).
std::vector<int> usable_columns(const Eigen::MatrixXd& f) {
  std::vector<int> kept;
  for (long j = 0; j < f.cols(); ++j) {
    if (f.col(j).norm() > kZeroNorm) kept.push_back(static_cast<int>(j));
  }
  return kept;
}

struct InfoTerm {
  double value = 0.0;
  Eigen::MatrixXd dfeatures;  // full-batch width, zeros at skipped columns
  Eigen::MatrixXd dclass;     // d x C
  bool active = false;
};

InfoTerm info_loss_term(const TrainConfig& cfg, const Eigen::MatrixXd& f,
                        const std::vector<int>& labels_batch, const Eigen::MatrixXd& wc) {
  InfoTerm term;
  if (cfg.loss == LossKind::ce) return term;

  const std::vector<int> kept = usable_columns(f);
  if (kept.empty()) return term;

  Eigen::MatrixXd sub(f.rows(), kept.size());
  std::vector<int> sub_labels(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    sub.col(j) = f.col(kept[j]);
    sub_labels[j] = labels_batch[kept[j]];
  }
  const FeatureMatrix sub_features(std::move(sub), sub_labels);
  const FeatureMatrix weight_features(wc);

  LossValueAndGrad lv;
  switch (cfg.loss) {
    case LossKind::ce_cma:
      lv = cma_loss(sub_features, weight_features);
      break;
    case LossKind::ce_mi:
      lv = mi_loss(sub_features, weight_features, cfg.lambda);
      break;
    case LossKind::ce_hd:
      lv = hd_loss(sub_features, weight_features, cfg.lambda);
      break;
    default:
      return term;
  }

  term.value = lv.value;
  term.dfeatures = Eigen::MatrixXd::Zero(f.rows(), f.cols());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    term.dfeatures.col(kept[j]) = lv.feature_grad.col(j);
  }
  term.dclass = lv.weight_grad;
  term.active = true;
  return term;
}

BatchGradients batch_gradients(const ModelParams& params, const TrainConfig& cfg,
                               const Eigen::MatrixXd& x, const std::vector<int>& labels_batch) {
  const ForwardCache cache = run_forward(params, x);
  const auto [probs, logprobs] = softmax_t(cache.logits, cfg.temperature);
  const long b = x.cols();

  double ce = 0.0;
  Eigen::MatrixXd dlogits = probs;
  for (long j = 0; j < b; ++j) {
    ce -= logprobs(labels_batch[j], j);
    dlogits(labels_batch[j], j) -= 1.0;
  }
  ce /= static_cast<double>(b);
  dlogits /= cfg.temperature * static_cast<double>(b);

  const Eigen::MatrixXd wc = class_vectors(params);
  const InfoTerm info = info_loss_term(cfg, cache.post.back(), labels_batch, wc);

  double ce_scale = 1.0;
  double info_scale = 1.0;
  if (cfg.loss == LossKind::ce_cma) {
    ce_scale = 1.0 - cfg.lambda;
    info_scale = cfg.lambda;
  }

  BatchGradients grads;
  grads.loss = ce_scale * ce + info_scale * info.value;

  const std::size_t hidden = params.arch.hidden_dims.size();
  grads.dw.resize(hidden + 1);
  grads.db.resize(hidden + 1);

  dlogits *= ce_scale;
  Eigen::MatrixXd df =
      head_backward(params, cache, dlogits, grads.dw[hidden], grads.db[hidden]);
  if (info.active) {
    df += info_scale * info.dfeatures;
    if (cfg.info_grad_to_weights) {
      grads.dw[hidden] += info_scale * info.dclass.transpose();
    }
  }

  for (long l = static_cast<long>(hidden) - 1; l >= 0; --l) {
    const Eigen::MatrixXd da =
        df.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd& input = l == 0 ? x : cache.post[l - 1];
    grads.dw[l] = da * input.transpose();
    grads.db[l] = da.rowwise().sum();
    if (l > 0) df = params.weights[l].transpose() * da;
  }
  return grads;
}

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const ModelParams& params) : cfg_(cfg) {
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      mw_.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
      mb_.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
      if (cfg.optimizer == OptimizerKind::adamw) {
        vw_.push_back(mw_.back());
        vb_.push_back(mb_.back());
      }
    }
  }

  void step(ModelParams& params, const BatchGradients& grads, double lr) {
    ++t_;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      if (cfg_.optimizer == OptimizerKind::sgd) {
        mw_[l] = cfg_.momentum * mw_[l] + grads.dw[l] + cfg_.weight_decay * params.weights[l];
        mb_[l] = cfg_.momentum * mb_[l] + grads.db[l] + cfg_.weight_decay * params.biases[l];
        params.weights[l] -= lr * mw_[l];
        params.biases[l] -= lr * mb_[l];
      } else {
        adamw(params.weights[l], grads.dw[l], mw_[l], vw_[l], lr);
        adamw(params.biases[l], grads.db[l], mb_[l], vb_[l], lr);
      }
    }
  }

 private:
  template <typename P, typename G>
  void adamw(P& param, const G& grad, P& m, P& v, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, t_);
    const double c2 = 1.0 - std::pow(beta2, t_);
    param -= lr * ((m / c1).array() / ((v / c2).array().sqrt() + eps)).matrix();
    param -= lr * cfg_.weight_decay * param;
  }

  const TrainConfig& cfg_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

FeatureMatrix subset(const FeatureMatrix& data, const std::vector<int>& indices) {
  Eigen::MatrixXd x(data.dim(), indices.size());
  std::vector<int> y(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    x.col(j) = data.data().col(indices[j]);
    y[j] = data.labels()[indices[j]];
  }
  return FeatureMatrix(std::move(x), std::move(y));
}

std::vector<int> pick_eval_indices(int population, int wanted, Rng& rng) {
  std::vector<int> all(population);
  std::iota(all.begin(), all.end(), 0);
  if (population > wanted) {
    rng.shuffle(all);
    all.resize(wanted);
    std::sort(all.begin(), all.end());
  }
  return all;
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.temperature <= 0.0) throw InvariantViolation("temperature must be positive");
  if (cfg.steps < 0) throw InvariantViolation("steps must be nonnegative");
  if (cfg.batch_size < 1) throw InvariantViolation("batch size must be at least 1");
  if (cfg.lambda < 0.0) throw InvariantViolation("lambda must be nonnegative");
  if (cfg.loss == LossKind::ce_cma && cfg.lambda > 1.0) {
    throw InvariantViolation("ce+cma lambda must lie in [0, 1]");
  }
  if (cfg.eval_batch < 1) throw InvariantViolation("eval batch must be at least 1");
}

ModelParams mix_params(const ModelParams& a, const ModelParams& b, double w) {
  if (w == 0.0) return a;
  if (w == 1.0) return b;
  ModelParams out = a;
  for (std::size_t l = 0; l < out.weights.size(); ++l) {
    out.weights[l] = (1.0 - w) * a.weights[l] + w * b.weights[l];
    out.biases[l] = (1.0 - w) * a.biases[l] + w * b.biases[l];
  }
  return out;
}

}  // namespace

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
  if (arch.input_dim < 1 || arch.classes < 2) {
    throw InvariantViolation("architecture needs input_dim >= 1 and classes >= 2");
  }
  Rng rng(seed);
  ModelParams params;
  params.arch = arch;

  std::vector<int> dims = {arch.input_dim};
  dims.insert(dims.end(), arch.hidden_dims.begin(), arch.hidden_dims.end());
  dims.push_back(arch.classes);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const bool is_head = l + 2 == dims.size();
    const double scale = is_head ? std::sqrt(1.0 / fan_in) : std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = scale * rng.gaussian();
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return params;
}

FeatureMatrix make_blobs(int classes, int input_dim, int n_per_class, double separation,
                         double noise_sigma, std::uint64_t seed) {
  if (classes < 2) throw DegenerateClassCount(classes);
  if (n_per_class < 2) throw InvariantViolation("n_per_class must be at least 2");
  const FeatureMatrix etf = simplex_etf(classes, input_dim, derive_seed(seed, 0));
  Rng noise(derive_seed(seed, 1));

  Eigen::MatrixXd x(input_dim, classes * n_per_class);
  std::vector<int> labels(classes * n_per_class);
  int col = 0;
  for (int c = 0; c < classes; ++c) {
    const Eigen::VectorXd center = separation * etf.data().col(c);
    for (int k = 0; k < n_per_class; ++k, ++col) {
      labels[col] = c;
      x.col(col) = center;
      for (int i = 0; i < input_dim; ++i) x(i, col) += noise_sigma * noise.gaussian();
    }
  }
  return FeatureMatrix(std::move(x), std::move(labels));
}

std::pair<FeatureMatrix, FeatureMatrix> make_modadd(int modulus, double train_fraction,
                                                    std::uint64_t seed) {
  if (modulus < 2) throw InvariantViolation("modulus must be at least 2");
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw InvariantViolation("train_fraction must lie in (0, 1)");
  }
  const int total = modulus * modulus;
  const int n_train = static_cast<int>(std::floor(train_fraction * total));
  if (n_train < 1 || n_train >= total) {
    throw InvariantViolation("train_fraction leaves an empty split");
  }

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const auto build = [&](int begin, int count) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2 * modulus, count);
    std::vector<int> labels(count);
    for (int j = 0; j < count; ++j) {
      const int pair = order[begin + j];
      const int a = pair / modulus;
      const int b = pair % modulus;
      x(a, j) = 1.0;
      x(modulus + b, j) = 1.0;
      labels[j] = (a + b) % modulus;
    }
    return FeatureMatrix(std::move(x), std::move(labels));
  };
  return {build(0, n_train), build(n_train, total - n_train)};
}

ForwardResult forward(const ModelParams& params, const Eigen::MatrixXd& x, double temperature) {
  if (temperature <= 0.0) throw InvariantViolation("temperature must be positive");
  ForwardCache cache = run_forward(params, x);
  ForwardResult result;
  result.features = std::move(cache.post.back());
  result.probabilities = softmax_t(cache.logits, temperature).first;
  result.logits = std::move(cache.logits);
  return result;
}

MetricRecord evaluate(const ModelParams& params, const FeatureMatrix& data, double temperature,
                      Split split, long step, LossKind loss, double lambda) {
  const ForwardCache cache = run_forward(params, data.data());
  const auto [probs, logprobs] = softmax_t(cache.logits, temperature);
  const auto& labels = data.labels();
  const long n = data.count();

  MetricRecord record;
  record.step = step;
  record.split = split;

  long correct = 0;
  double ce = 0.0;
  for (long j = 0; j < n; ++j) {
    int best = 0;
    cache.logits.col(j).maxCoeff(&best);
    correct += best == labels[j];
    ce -= logprobs(labels[j], j);
  }
  record.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  ce /= static_cast<double>(n);

  TrainConfig loss_cfg;
  loss_cfg.loss = loss;
  loss_cfg.lambda = lambda;
  const Eigen::MatrixXd wc = class_vectors(params);
  const InfoTerm info = info_loss_term(loss_cfg, cache.post.back(), labels, wc);
  const double ce_scale = loss == LossKind::ce_cma ? 1.0 - lambda : 1.0;
  const double info_scale = loss == LossKind::ce_cma ? lambda : 1.0;
  record.loss = ce_scale * ce + info_scale * info.value;

  const Eigen::MatrixXd& f = cache.post.back();
  const std::vector<int> kept = usable_columns(f);
  if (kept.empty()) return record;  // fully dead batch: all metrics stay 0

  Eigen::MatrixXd fk(f.rows(), kept.size());
  Eigen::MatrixXd vk(wc.rows(), kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    fk.col(j) = f.col(kept[j]);
    vk.col(j) = wc.col(labels[kept[j]]);
  }

  const GramMatrix gf = gram(FeatureMatrix(std::move(fk)));
  const GramMatrix gv = gram(FeatureMatrix(std::move(vk)));
  record.h_feat = matrix_entropy(gf);
  record.h_weights = matrix_entropy(gram(FeatureMatrix(wc)));
  record.mi = matrix_mi(gf, gv);
  record.hdr = hdr(gf, gv);
  try {
    record.mir = mir(gf, gv);
  } catch (const DegenerateEntropy&) {
    record.mir = 0.0;
  }
  return record;
}

namespace {

// Train/test blob splits share one draw (same class centers, disjoint noise):
// the first n_per_class samples of each class train, the rest test.
FeatureMatrix blobs_half(const TrainConfig& config, bool train_half) {
  const BlobsSpec& b = config.dataset.blobs;
  const FeatureMatrix full = make_blobs(b.classes, b.input_dim, 2 * b.n_per_class, b.separation,
                                        b.noise_sigma, derive_seed(config.seed, 10));
  std::vector<int> indices;
  indices.reserve(static_cast<std::size_t>(b.classes) * b.n_per_class);
  for (int c = 0; c < b.classes; ++c) {
    const int base = c * 2 * b.n_per_class + (train_half ? 0 : b.n_per_class);
    for (int k = 0; k < b.n_per_class; ++k) indices.push_back(base + k);
  }
  return subset(full, indices);
}

}  // namespace

FeatureMatrix dataset_train_split(const TrainConfig& config) {
  if (config.dataset.kind == DatasetSpec::Kind::blobs) return blobs_half(config, true);
  return make_modadd(config.dataset.modadd.modulus, config.dataset.modadd.train_fraction,
                     derive_seed(config.seed, 10))
      .first;
}

FeatureMatrix dataset_test_split(const TrainConfig& config) {
  if (config.dataset.kind == DatasetSpec::Kind::blobs) return blobs_half(config, false);
  return make_modadd(config.dataset.modadd.modulus, config.dataset.modadd.train_fraction,
                     derive_seed(config.seed, 10))
      .second;
}

std::pair<FeatureMatrix, FeatureMatrix> eval_batches(const TrainConfig& config) {
  const FeatureMatrix train_data = dataset_train_split(config);
  const FeatureMatrix test_data = dataset_test_split(config);
  Rng eval_rng(derive_seed(config.seed, 13));
  FeatureMatrix train_eval =
      subset(train_data, pick_eval_indices(train_data.count(), config.eval_batch, eval_rng));
  FeatureMatrix test_eval =
      subset(test_data, pick_eval_indices(test_data.count(), config.eval_batch, eval_rng));
  return {std::move(train_eval), std::move(test_eval)};
}

Checkpoint train(const TrainConfig& config, std::ostream* log_sink) {
  TrainConfig cfg = config;
  validate_config(cfg);
  if (cfg.eval_every <= 0) cfg.eval_every = std::max<long>(1, cfg.steps / 50);

  const FeatureMatrix train_data = dataset_train_split(cfg);

  Architecture arch;
  arch.input_dim = train_data.dim();
  arch.hidden_dims = cfg.hidden_dims;
  arch.classes = cfg.dataset.kind == DatasetSpec::Kind::blobs ? cfg.dataset.blobs.classes
                                                              : cfg.dataset.modadd.modulus;
  arch.head = cfg.head;
  ModelParams params = init_params(arch, derive_seed(cfg.seed, 12));

  const auto [train_eval, test_eval] = eval_batches(cfg);

  const auto emit = [&](long step) {
    if (!log_sink) return;
    const MetricRecord train_rec = evaluate(params, train_eval, cfg.temperature, Split::train,
                                            step, cfg.loss, cfg.lambda);
    const MetricRecord test_rec =
        evaluate(params, test_eval, cfg.temperature, Split::test, step, cfg.loss, cfg.lambda);
    *log_sink << metric_record_to_jsonl(train_rec) << '\n'
              << metric_record_to_jsonl(test_rec) << '\n';
  };

  emit(0);

  Rng order_rng(derive_seed(cfg.data_seed, 14));
  std::vector<int> order(train_data.count());
  std::iota(order.begin(), order.end(), 0);
  order_rng.shuffle(order);
  std::size_t cursor = 0;
  const int batch = std::min<int>(cfg.batch_size, train_data.count());

  Optimizer optimizer(cfg, params);
  Eigen::MatrixXd x(train_data.dim(), batch);
  std::vector<int> y(batch);

  for (long step = 1; step <= cfg.steps; ++step) {
    if (cursor + batch > order.size()) {
      order_rng.shuffle(order);
      cursor = 0;
    }
    for (int j = 0; j < batch; ++j) {
      const int idx = order[cursor + j];
      x.col(j) = train_data.data().col(idx);
      y[j] = train_data.labels()[idx];
    }
    cursor += batch;

    const BatchGradients grads = batch_gradients(params, cfg, x, y);
    if (!std::isfinite(grads.loss)) throw DivergedLoss(step);

    const double lr =
        cfg.lr0 * 0.5 *
        (1.0 + std::cos(M_PI * static_cast<double>(step - 1) / static_cast<double>(cfg.steps)));
    optimizer.step(params, grads, lr);

    if (step % cfg.eval_every == 0 || step == cfg.steps) emit(step);
  }

  Checkpoint ckpt;
  ckpt.params = std::move(params);
  ckpt.config = cfg;
  ckpt.step = cfg.steps;
  ckpt.rng_digest = order_rng.digest();
  return ckpt;
}

std::vector<MetricRecord> interpolate(const Checkpoint& a, const Checkpoint& b,
                                      const std::vector<double>& weights,
                                      const FeatureMatrix& eval_data, int max_threads) {
  if (!(a.params.arch == b.params.arch)) throw ArchitectureMismatch();
  for (const double w : weights) {
    if (w < 0.0 || w > 1.0) throw InvariantViolation("interpolation weights must lie in [0, 1]");
  }

  std::vector<MetricRecord> records(weights.size());
  const auto eval_at = [&](std::size_t i) {
    const ModelParams mixed = mix_params(a.params, b.params, weights[i]);
    records[i] = evaluate(mixed, eval_data, a.config.temperature, Split::test,
                          static_cast<long>(i));
  };

  if (max_threads <= 1 || weights.size() <= 1) {
    for (std::size_t i = 0; i < weights.size(); ++i) eval_at(i);
    return records;
  }

  std::vector<std::thread> pool;
  const int workers = std::min<int>(max_threads, static_cast<int>(weights.size()));
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < weights.size(); i = next.fetch_add(1)) {
        eval_at(i);
      }
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

PseudoLabelSelection pseudo_label_filter(const ModelParams& params,
                                         const Eigen::MatrixXd& unlabeled, double temperature,
                                         double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw InvariantViolation("pseudo-label threshold must lie in [0, 1]");
  }
  const ForwardResult fw = forward(params, unlabeled, temperature);

  PseudoLabelSelection selection;
  for (long j = 0; j < unlabeled.cols(); ++j) {
    int best = 0;
    const double top = fw.probabilities.col(j).maxCoeff(&best);
    if (top > threshold) {
      selection.kept_indices.push_back(static_cast<int>(j));
      selection.pseudo_labels.push_back(best);
    }
  }
  selection.empty = selection.kept_indices.empty();
  selection.features.resize(fw.features.rows(), selection.kept_indices.size());
  for (std::size_t j = 0; j < selection.kept_indices.size(); ++j) {
    selection.features.col(j) = fw.features.col(selection.kept_indices[j]);
  }
  return selection;
}

Eigen::MatrixXd gaussian_augment(const Eigen::MatrixXd& x, double sigma, Rng& rng) {
  Eigen::MatrixXd out = x;
  for (long j = 0; j < out.cols(); ++j) {
    for (long i = 0; i < out.rows(); ++i) out(i, j) += sigma * rng.gaussian();
  }
  return out;
}

}  // namespace matinfo
