// Desk-scale supervised training: ReLU MLP plus a linear or cosine head on
// synthetic datasets, with deterministic seeding, per-step information
// metrics, checkpointing, parameter interpolation and pseudo-label filtering.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "matinfo/matrix.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/rng.hpp"

namespace matinfo {

enum class HeadKind { linear, cosine };

struct Architecture {
  int input_dim = 0;
  std::vector<int> hidden_dims;  // ReLU layers
  int classes = 0;
  HeadKind head = HeadKind::linear;

  bool operator==(const Architecture&) const = default;
};

// Dense parameters, one (weight, bias) pair per hidden layer plus the head.
// The cosine head keeps its bias at zero.
struct ModelParams {
  Architecture arch;
  std::vector<Eigen::MatrixXd> weights;  // out x in
  std::vector<Eigen::VectorXd> biases;
};

ModelParams init_params(const Architecture& arch, std::uint64_t seed);

struct BlobsSpec {
  int classes = 10;
  int input_dim = 32;
  int n_per_class = 200;
  double separation = 4.0;
  double noise_sigma = 1.0;
};

struct ModAddSpec {
  int modulus = 113;
  double train_fraction = 0.3;
};

struct DatasetSpec {
  enum class Kind { blobs, modadd };
  Kind kind = Kind::blobs;
  BlobsSpec blobs;
  ModAddSpec modadd;
};

enum class LossKind { ce, ce_mi, ce_hd, ce_cma };
enum class OptimizerKind { sgd, adamw };

struct TrainConfig {
  DatasetSpec dataset;
  LossKind loss = LossKind::ce;
  double lambda = 0.5;  // ce_cma: convex-combination weight in [0,1]; ce_mi/ce_hd: term weight
  double temperature = 1.0;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double lr0 = 0.03;  // cosine-annealed to zero over the run
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 64;
  long steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;  // batch order; equals seed unless overridden
  std::vector<int> hidden_dims = {128, 128};
  HeadKind head = HeadKind::linear;
  long eval_every = 0;  // 0 picks max(1, steps / 50)
  int eval_batch = 256;
  bool info_grad_to_weights = true;  // route info-loss gradients into the head
};

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  long step = 0;
  std::string rng_digest;
};

// Gaussian blobs around simplex-ETF class centers scaled by `separation`.
// Labels are class-major; identical seeds give identical datasets.
FeatureMatrix make_blobs(int classes, int input_dim, int n_per_class, double separation,
                         double noise_sigma, std::uint64_t seed);

// All modulus^2 pairs (a, b) as concatenated one-hot columns of length
// 2*modulus, labeled (a+b) mod modulus, split train/test by a seeded shuffle
// at floor(train_fraction * modulus^2).
std::pair<FeatureMatrix, FeatureMatrix> make_modadd(int modulus, double train_fraction,
                                                    std::uint64_t seed);

// The labeled splits realized by a config, deterministic per config seed.
FeatureMatrix dataset_train_split(const TrainConfig& config);
FeatureMatrix dataset_test_split(const TrainConfig& config);

// The fixed seeded evaluation subsets (train, test) used for metric logging.
std::pair<FeatureMatrix, FeatureMatrix> eval_batches(const TrainConfig& config);

struct ForwardResult {
  Eigen::MatrixXd features;       // penultimate representation, column per sample
  Eigen::MatrixXd logits;         // C x B
  Eigen::MatrixXd probabilities;  // softmax(logits / temperature); columns sum to 1
};

ForwardResult forward(const ModelParams& params, const Eigen::MatrixXd& x, double temperature);

// Accuracy, objective value and the information metrics of `params` on a
// labeled set: H(G(f)), H(G(W)) and MI/MIR/HDR between the sample features
// and the per-sample class-weight matrix.
MetricRecord evaluate(const ModelParams& params, const FeatureMatrix& data, double temperature,
                      Split split, long step, LossKind loss = LossKind::ce, double lambda = 0.0);

// Runs the configured objective; appends one JSONL record per split to
// log_sink (if non-null) at step 0, every eval interval and the final step.
// Bitwise deterministic for a fixed config at a single thread.
Checkpoint train(const TrainConfig& config, std::ostream* log_sink);

// Evaluates (1-w) a + w b across interpolation weights on eval_data; results
// are ordered like `weights`. max_threads > 1 evaluates points concurrently.
std::vector<MetricRecord> interpolate(const Checkpoint& a, const Checkpoint& b,
                                      const std::vector<double>& weights,
                                      const FeatureMatrix& eval_data, int max_threads = 1);

struct PseudoLabelSelection {
  std::vector<int> kept_indices;  // positions within the unlabeled batch
  Eigen::MatrixXd features;       // d x |kept|
  std::vector<int> pseudo_labels;
  bool empty = false;
};

// Keeps the samples whose max predicted probability strictly exceeds the
// threshold; pseudo-label is the argmax. An empty selection is flagged, not
// an error.
PseudoLabelSelection pseudo_label_filter(const ModelParams& params,
                                         const Eigen::MatrixXd& unlabeled, double temperature,
                                         double threshold);

// Additive Gaussian input noise; the weak/strong augmentation pair for
// pseudo-labeling uses two magnitudes of this.
Eigen::MatrixXd gaussian_augment(const Eigen::MatrixXd& x, double sigma, Rng& rng);

}  // namespace matinfo
