#pragma once

// Three-layer perceptron over credential embeddings:
//
//   logits = W3 * drop(relu(W2 * drop(relu(W1 * x + b1)) + b2)) + b3
//
// trained with softmax cross-entropy and AdamW. All arithmetic is double
// precision and single-threaded so training is bitwise reproducible.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "credscan/embedder.h"
#include "credscan/random.h"
#include "credscan/taxonomy.h"

namespace credscan {

struct MlpArchitecture {
  std::size_t input_dim = kDefaultEmbeddingDim;
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 64;
  std::size_t num_classes = kCategoryCount;
  double dropout_rate = 0.2;

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

void validate(const MlpArchitecture& arch);

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct MlpParams {
  MlpArchitecture arch;
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
  Matrix w3;
  std::vector<double> b3;

  // All-zero parameters shaped for `arch`.
  static MlpParams zeros(const MlpArchitecture& arch);

  // Visits (tensor, is_weight) in declaration order: W1 b1 W2 b2 W3 b3.
  template <typename F>
  void for_each_tensor(F&& f) {
    f(w1.data, true);
    f(b1, false);
    f(w2.data, true);
    f(b2, false);
    f(w3.data, true);
    f(b3, false);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(w1.data, true);
    f(b1, false);
    f(w2.data, true);
    f(b2, false);
    f(w3.data, true);
    f(b3, false);
  }

  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Throws DomainError when tensor shapes disagree with `params.arch`.
void validate(const MlpParams& params);

// He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed);

enum class Mode { kTrain, kInfer };

// Everything backward() needs from one forward pass.
struct ForwardCache {
  std::vector<double> x;
  std::vector<double> z1, a1;  // pre-activation, post relu+dropout
  std::vector<double> z2, a2;
  std::vector<double> mask1, mask2;  // inverted-dropout scale per unit (0 or 1/(1-p))
  std::vector<double> logits;
};

// Train mode draws dropout masks from `rng` (required when dropout_rate > 0).
// Infer mode is pure and deterministic. Throws DomainError on a dimension mismatch.
ForwardCache forward(std::span<const double> x, const MlpParams& params, Mode mode, Rng* rng = nullptr);

// Numerically stable: exponentiates z - max(z).
std::vector<double> softmax(std::span<const double> logits);

// Floor applied inside the log so a zero probability stays finite.
inline constexpr double kLogFloor = 1e-12;

// -log(p[label] + 1e-12). Throws DomainError on an invalid label.
double cross_entropy(std::span<const double> probabilities, std::size_t label);

// Gradient of cross_entropy(softmax(logits), label) w.r.t. every parameter,
// with the cached dropout masks held fixed. Shaped like MlpParams.
MlpParams backward(const ForwardCache& cache, std::size_t label, const MlpParams& params);

struct TrainConfig {
  std::string preset = "custom";
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
};

void validate(const TrainConfig& config);

// "bert-mlp": lr 1e-3, 10 epochs. "gpt2-mlp": lr 1e-4, 4 epochs.
// Both: batch 32, betas (0.9, 0.999), eps 1e-8, weight decay 0.01.
// Throws DomainError for any other name.
TrainConfig preset_config(std::string_view name);

struct AdamState {
  MlpParams m;
  MlpParams v;
  std::uint64_t step = 0;

  static AdamState for_params(const MlpParams& params);
};

// One AdamW update with bias correction. Weight decay is decoupled and
// applies to weight matrices only:
//   theta -= lr * m_hat / (sqrt(v_hat) + eps) + lr * weight_decay * theta
void adamw_step(MlpParams& params, const MlpParams& gradients, AdamState& state, const TrainConfig& config);

struct LabeledEmbeddings {
  std::vector<EmbeddingVector> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> valid_loss;
  std::optional<double> valid_accuracy;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochStats> history;
};

// Mean loss and accuracy of infer-mode predictions.
struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation evaluate(const MlpParams& params, const LabeledEmbeddings& data);

// Seeded mini-batch AdamW. Each epoch reshuffles the training set; history
// holds infer-mode loss/accuracy on train and valid after every epoch.
// Parameters initialize from `config.seed` unless `initial` is given.
// Throws DomainError on an empty training set or mismatched dimensions.
TrainResult train(const LabeledEmbeddings& train_set, const LabeledEmbeddings& valid_set,
                  const MlpArchitecture& arch, const TrainConfig& config,
                  const MlpParams* initial = nullptr);

struct Prediction {
  CredentialCategory category = CredentialCategory::kOthers;
  std::size_t class_id = 0;
  std::vector<double> probabilities;
};

// argmax of softmax(forward(x, infer)); ties go to the lowest class id.
// The category is only meaningful for 8-class models; other class counts
// report class_id and leave category at its default.
Prediction predict(std::span<const double> x, const MlpParams& params);

// A trained model with the metadata its checkpoint records.
struct MlpClassifier {
  MlpParams params;
  std::string preset = "custom";
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return params.arch.input_dim; }
  Prediction predict(const EmbeddingVector& x) const { return credscan::predict(x.view(), params); }
};

// Checkpoint layout (little-endian):
//   magic "CSMLP\0\0\0", u32 version (=1),
//   u64 input_dim, hidden1, hidden2, num_classes, f64 dropout_rate,
//   u64 seed, u32 preset length, preset bytes,
//   then W1 b1 W2 b2 W3 b3 as f64.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const MlpClassifier& model, const std::string& path);
// Throws IoError if unreadable, ParseError on a bad magic, version or size.
MlpClassifier load_checkpoint(const std::string& path);

nlohmann::json history_to_json(const std::vector<EpochStats>& history);

}  // namespace credscan
