#include "credscan/classifier.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "credscan/error.h"

namespace credscan {
namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'C', 'S', 'M', 'L', 'P', '\0', '\0', '\0'};

std::array<std::vector<double>*, 6> tensors_of(MlpParams& p) {
  return {&p.w1.data, &p.b1, &p.w2.data, &p.b2, &p.w3.data, &p.b3};
}
std::array<const std::vector<double>*, 6> tensors_of(const MlpParams& p) {
  return {&p.w1.data, &p.b1, &p.w2.data, &p.b2, &p.w3.data, &p.b3};
}
constexpr std::array<bool, 6> kIsWeight = {true, false, true, false, true, false};

// y = W x + b
void affine(const Matrix& w, const std::vector<double>& b, std::span<const double> x, std::vector<double>& y) {
  y.assign(w.rows, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = w.data.data() + r * w.cols;
    double s = b[r];
    for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

void relu_dropout(const std::vector<double>& z, double rate, Mode mode, Rng* rng, std::vector<double>& mask,
                  std::vector<double>& a) {
  mask.assign(z.size(), 1.0);
  if (mode == Mode::kTrain && rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& m : mask) m = uniform_unit(*rng) < rate ? 0.0 : keep_scale;
  }
  a.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] * mask[i] : 0.0;
}

// grads += d loss / d params for one sample.
void accumulate_backward(const ForwardCache& cache, std::size_t label, const MlpParams& params, MlpParams& grads) {
  const auto& arch = params.arch;
  std::vector<double> delta = softmax(cache.logits);
  delta[label] -= 1.0;

  // Output layer.
  for (std::size_t k = 0; k < arch.num_classes; ++k) {
    const double d = delta[k];
    grads.b3[k] += d;
    if (d == 0.0) continue;
    double* g = grads.w3.data.data() + k * arch.hidden2;
    for (std::size_t j = 0; j < arch.hidden2; ++j) g[j] += d * cache.a2[j];
  }

  // Hidden layer 2.
  std::vector<double> dz2(arch.hidden2, 0.0);
  for (std::size_t k = 0; k < arch.num_classes; ++k) {
    const double d = delta[k];
    const double* w = params.w3.data.data() + k * arch.hidden2;
    for (std::size_t j = 0; j < arch.hidden2; ++j) dz2[j] += w[j] * d;
  }
  for (std::size_t j = 0; j < arch.hidden2; ++j) {
    dz2[j] = cache.z2[j] > 0.0 ? dz2[j] * cache.mask2[j] : 0.0;
  }
  for (std::size_t j = 0; j < arch.hidden2; ++j) {
    const double d = dz2[j];
    grads.b2[j] += d;
    if (d == 0.0) continue;
    double* g = grads.w2.data.data() + j * arch.hidden1;
    for (std::size_t i = 0; i < arch.hidden1; ++i) g[i] += d * cache.a1[i];
  }

  // Hidden layer 1.
  std::vector<double> dz1(arch.hidden1, 0.0);
  for (std::size_t j = 0; j < arch.hidden2; ++j) {
    const double d = dz2[j];
    if (d == 0.0) continue;
    const double* w = params.w2.data.data() + j * arch.hidden1;
    for (std::size_t i = 0; i < arch.hidden1; ++i) dz1[i] += w[i] * d;
  }
  for (std::size_t i = 0; i < arch.hidden1; ++i) {
    dz1[i] = cache.z1[i] > 0.0 ? dz1[i] * cache.mask1[i] : 0.0;
  }
  for (std::size_t i = 0; i < arch.hidden1; ++i) {
    const double d = dz1[i];
    grads.b1[i] += d;
    if (d == 0.0) continue;
    double* g = grads.w1.data.data() + i * arch.input_dim;
    for (std::size_t c = 0; c < arch.input_dim; ++c) g[c] += d * cache.x[c];
  }
}

void check_input(std::span<const double> x, const MlpParams& params) {
  if (x.size() != params.arch.input_dim) {
    throw DomainError("input dimension " + std::to_string(x.size()) + " does not match model input_dim " +
                      std::to_string(params.arch.input_dim));
  }
}

void check_dataset(const LabeledEmbeddings& data, const MlpArchitecture& arch, const char* what) {
  if (data.inputs.size() != data.labels.size()) {
    throw DomainError(std::string(what) + ": inputs and labels differ in length");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.inputs[i].dimension() != arch.input_dim) {
      throw DomainError(std::string(what) + ": sample " + std::to_string(i) + " has dimension " +
                        std::to_string(data.inputs[i].dimension()) + ", expected " + std::to_string(arch.input_dim));
    }
    if (data.labels[i] >= arch.num_classes) {
      throw DomainError(std::string(what) + ": label out of range at sample " + std::to_string(i));
    }
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

template <typename T>
T read_le(std::istream& in, const std::string& path) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), sizeof(T))) {
    throw ParseError("checkpoint is truncated: " + path, 0);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return value;
}

void write_f64(std::ostream& out, double x) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &x, sizeof x);
  write_le(out, bits);
}

double read_f64(std::istream& in, const std::string& path) {
  const auto bits = read_le<std::uint64_t>(in, path);
  double x = 0.0;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

}  // namespace

void validate(const MlpArchitecture& arch) {
  if (arch.input_dim == 0 || arch.hidden1 == 0 || arch.hidden2 == 0 || arch.num_classes == 0) {
    throw DomainError("MLP dimensions must be positive");
  }
  if (!(arch.dropout_rate >= 0.0 && arch.dropout_rate < 1.0)) {
    throw DomainError("dropout_rate must lie in [0, 1)");
  }
}

MlpParams MlpParams::zeros(const MlpArchitecture& arch) {
  validate(arch);
  MlpParams p;
  p.arch = arch;
  p.w1 = Matrix(arch.hidden1, arch.input_dim);
  p.b1.assign(arch.hidden1, 0.0);
  p.w2 = Matrix(arch.hidden2, arch.hidden1);
  p.b2.assign(arch.hidden2, 0.0);
  p.w3 = Matrix(arch.num_classes, arch.hidden2);
  p.b3.assign(arch.num_classes, 0.0);
  return p;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::vector<double>& t, bool) { n += t.size(); });
  return n;
}

bool MlpParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&](const std::vector<double>& t, bool) {
    ok = ok && std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
  });
  return ok;
}

void validate(const MlpParams& p) {
  validate(p.arch);
  const auto& a = p.arch;
  const bool ok = p.w1.rows == a.hidden1 && p.w1.cols == a.input_dim && p.w1.data.size() == a.hidden1 * a.input_dim &&
                  p.b1.size() == a.hidden1 && p.w2.rows == a.hidden2 && p.w2.cols == a.hidden1 &&
                  p.w2.data.size() == a.hidden2 * a.hidden1 && p.b2.size() == a.hidden2 &&
                  p.w3.rows == a.num_classes && p.w3.cols == a.hidden2 &&
                  p.w3.data.size() == a.num_classes * a.hidden2 && p.b3.size() == a.num_classes;
  if (!ok) throw DomainError("MLP parameter shapes do not match the architecture");
}

MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  MlpParams p = MlpParams::zeros(arch);
  Rng rng(seed);
  auto he_uniform = [&](Matrix& w) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols));
    for (double& v : w.data) v = uniform_real(rng, -bound, bound);
  };
  he_uniform(p.w1);
  he_uniform(p.w2);
  he_uniform(p.w3);
  return p;
}

ForwardCache forward(std::span<const double> x, const MlpParams& params, Mode mode, Rng* rng) {
  check_input(x, params);
  const double rate = params.arch.dropout_rate;
  if (mode == Mode::kTrain && rate > 0.0 && rng == nullptr) {
    throw DomainError("train-mode forward with dropout needs a random generator");
  }
  ForwardCache c;
  c.x.assign(x.begin(), x.end());
  affine(params.w1, params.b1, c.x, c.z1);
  relu_dropout(c.z1, rate, mode, rng, c.mask1, c.a1);
  affine(params.w2, params.b2, c.a1, c.z2);
  relu_dropout(c.z2, rate, mode, rng, c.mask2, c.a2);
  affine(params.w3, params.b3, c.a2, c.logits);
  return c;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

double cross_entropy(std::span<const double> probabilities, std::size_t label) {
  if (label >= probabilities.size()) {
    throw DomainError("label " + std::to_string(label) + " outside [0, " + std::to_string(probabilities.size()) + ")");
  }
  return -std::log(probabilities[label] + kLogFloor);
}

MlpParams backward(const ForwardCache& cache, std::size_t label, const MlpParams& params) {
  if (label >= params.arch.num_classes) throw DomainError("label out of range");
  MlpParams grads = MlpParams::zeros(params.arch);
  accumulate_backward(cache, label, params, grads);
  return grads;
}

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw DomainError("Adam betas must lie in [0, 1)");
  }
  if (!(c.epsilon > 0.0)) throw DomainError("Adam epsilon must be positive");
  if (!(c.weight_decay >= 0.0)) throw DomainError("weight_decay must be non-negative");
  if (c.batch_size == 0) throw DomainError("batch_size must be positive");
}

TrainConfig preset_config(std::string_view name) {
  TrainConfig c;
  c.preset = std::string(name);
  if (name == "bert-mlp") {
    c.learning_rate = 1e-3;
    c.epochs = 10;
  } else if (name == "gpt2-mlp") {
    c.learning_rate = 1e-4;
    c.epochs = 4;
  } else {
    throw DomainError("unknown preset '" + std::string(name) + "' (expected bert-mlp or gpt2-mlp)");
  }
  return c;
}

AdamState AdamState::for_params(const MlpParams& params) {
  return {MlpParams::zeros(params.arch), MlpParams::zeros(params.arch), 0};
}

void adamw_step(MlpParams& params, const MlpParams& gradients, AdamState& state, const TrainConfig& config) {
  if (!(params.arch == gradients.arch) || !(params.arch == state.m.arch) || !(params.arch == state.v.arch)) {
    throw DomainError("adamw_step: parameter, gradient and state shapes differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double lr = config.learning_rate;

  auto theta = tensors_of(params);
  auto grad = tensors_of(gradients);
  auto m = tensors_of(state.m);
  auto v = tensors_of(state.v);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double decay = kIsWeight[k] ? lr * config.weight_decay : 0.0;
    auto& th = *theta[k];
    const auto& g = *grad[k];
    auto& mk = *m[k];
    auto& vk = *v[k];
    for (std::size_t i = 0; i < th.size(); ++i) {
      mk[i] = config.beta1 * mk[i] + (1.0 - config.beta1) * g[i];
      vk[i] = config.beta2 * vk[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = mk[i] / bc1;
      const double v_hat = vk[i] / bc2;
      th[i] = th[i] - lr * m_hat / (std::sqrt(v_hat) + config.epsilon) - decay * th[i];
    }
  }
}

Evaluation evaluate(const MlpParams& params, const LabeledEmbeddings& data) {
  check_dataset(data, params.arch, "evaluate");
  if (data.empty()) throw DomainError("evaluate: empty dataset");
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto cache = forward(data.inputs[i].view(), params, Mode::kInfer);
    const auto p = softmax(cache.logits);
    loss += cross_entropy(p, data.labels[i]);
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (best == data.labels[i]) ++correct;
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainResult train(const LabeledEmbeddings& train_set, const LabeledEmbeddings& valid_set, const MlpArchitecture& arch,
                  const TrainConfig& config, const MlpParams* initial) {
  validate(arch);
  validate(config);
  if (train_set.empty()) throw DomainError("cannot train on an empty training set");
  check_dataset(train_set, arch, "train");
  check_dataset(valid_set, arch, "valid");

  TrainResult result;
  if (initial) {
    if (!(initial->arch == arch)) throw DomainError("initial parameters do not match the architecture");
    result.params = *initial;
  } else {
    result.params = init_params(arch, config.seed);
  }
  if (config.epochs == 0) return result;

  // Separate stream from initialization so the two do not correlate.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState state = AdamState::for_params(result.params);
  MlpParams grads = MlpParams::zeros(arch);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_in_place(std::span<std::size_t>(order), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grads.for_each_tensor([](std::vector<double>& t, bool) { std::fill(t.begin(), t.end(), 0.0); });
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const auto cache = forward(train_set.inputs[idx].view(), result.params, Mode::kTrain, &rng);
        accumulate_backward(cache, train_set.labels[idx], result.params, grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      grads.for_each_tensor([scale](std::vector<double>& t, bool) {
        for (double& g : t) g *= scale;
      });
      adamw_step(result.params, grads, state, config);
    }

    EpochStats stats;
    stats.epoch = epoch;
    const auto tr = evaluate(result.params, train_set);
    stats.train_loss = tr.loss;
    stats.train_accuracy = tr.accuracy;
    if (!valid_set.empty()) {
      const auto va = evaluate(result.params, valid_set);
      stats.valid_loss = va.loss;
      stats.valid_accuracy = va.accuracy;
    }
    result.history.push_back(stats);
  }
  return result;
}

Prediction predict(std::span<const double> x, const MlpParams& params) {
  const auto cache = forward(x, params, Mode::kInfer);
  Prediction out;
  out.probabilities = softmax(cache.logits);
  out.class_id = static_cast<std::size_t>(std::max_element(out.probabilities.begin(), out.probabilities.end()) -
                                          out.probabilities.begin());
  if (params.arch.num_classes == kCategoryCount) {
    out.category = category_from_id(static_cast<int>(out.class_id));
  }
  return out;
}

void save_checkpoint(const MlpClassifier& model, const std::string& path) {
  validate(model.params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  const auto& a = model.params.arch;
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, a.input_dim);
  write_le<std::uint64_t>(out, a.hidden1);
  write_le<std::uint64_t>(out, a.hidden2);
  write_le<std::uint64_t>(out, a.num_classes);
  write_f64(out, a.dropout_rate);
  write_le<std::uint64_t>(out, model.seed);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.preset.size()));
  out.write(model.preset.data(), static_cast<std::streamsize>(model.preset.size()));
  model.params.for_each_tensor([&](const std::vector<double>& t, bool) {
    for (double v : t) write_f64(out, v);
  });
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

MlpClassifier load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kCheckpointMagic) {
    throw ParseError("not a classifier checkpoint: " + path, 0);
  }
  const auto version = read_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version) + " in " + path, 0);
  }
  MlpArchitecture arch;
  arch.input_dim = read_le<std::uint64_t>(in, path);
  arch.hidden1 = read_le<std::uint64_t>(in, path);
  arch.hidden2 = read_le<std::uint64_t>(in, path);
  arch.num_classes = read_le<std::uint64_t>(in, path);
  arch.dropout_rate = read_f64(in, path);
  constexpr std::uint64_t kMaxDim = 1u << 20;
  if (arch.input_dim > kMaxDim || arch.hidden1 > kMaxDim || arch.hidden2 > kMaxDim || arch.num_classes > kMaxDim) {
    throw ParseError("checkpoint architecture is implausible: " + path, 0);
  }
  try {
    validate(arch);
  } catch (const DomainError& e) {
    throw ParseError(std::string("checkpoint architecture invalid: ") + e.what(), 0);
  }
  MlpClassifier model;
  model.seed = read_le<std::uint64_t>(in, path);
  const auto name_len = read_le<std::uint32_t>(in, path);
  if (name_len > 4096) throw ParseError("checkpoint preset name is implausibly long", 0);
  model.preset.resize(name_len);
  if (name_len && !in.read(model.preset.data(), name_len)) throw ParseError("checkpoint is truncated: " + path, 0);
  model.params = MlpParams::zeros(arch);
  model.params.for_each_tensor([&](std::vector<double>& t, bool) {
    for (double& v : t) v = read_f64(in, path);
  });
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint has trailing bytes: " + path, 0);
  if (!model.params.all_finite()) throw ParseError("checkpoint holds non-finite parameters: " + path, 0);
  return model;
}

nlohmann::json history_to_json(const std::vector<EpochStats>& history) {
  auto arr = nlohmann::json::array();
  for (const auto& h : history) {
    nlohmann::json e = {{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"train_accuracy", h.train_accuracy}};
    e["valid_loss"] = h.valid_loss ? nlohmann::json(*h.valid_loss) : nlohmann::json(nullptr);
    e["valid_accuracy"] = h.valid_accuracy ? nlohmann::json(*h.valid_accuracy) : nlohmann::json(nullptr);
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace credscan
