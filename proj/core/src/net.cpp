#include "gradrules/net.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "gradrules/rng.hpp"
#include "gradrules/sparse_text.hpp"

namespace gradrules {

void NetworkConfig::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  for (const auto s : layer_sizes) {
    if (s == 0) throw ConfigError("layer sizes must be positive");
  }
  if (n_outputs() < 2) throw ConfigError("network needs at least 2 output classes");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(adam.learning_rate > 0.0) || !(adam.epsilon > 0.0)) {
    throw ConfigError("learning rate and epsilon must be positive");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
}

ClassIndex argmax(std::span<const double> values) {
  ClassIndex best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (auto& x : p) x /= sum;
  return p;
}

DenseLayer make_layer(std::size_t in, std::size_t out) {
  return DenseLayer{in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)};
}

std::vector<DenseLayer> he_layers(const NetworkConfig& config, Rng& rng) {
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < config.layer_sizes.size(); ++l) {
    auto layer = make_layer(config.layer_sizes[l], config.layer_sizes[l + 1]);
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.in));
    for (auto& w : layer.weights) w = scale * rng.normal();
    layers.push_back(std::move(layer));
  }
  return layers;
}

void check_row(const SparseRow& row, std::size_t n_inputs) {
  if (!row.empty() && row.back().index >= n_inputs) {
    throw Error("input feature index " + std::to_string(row.back().index) + " out of range");
  }
}

}  // namespace

TrainedNetwork::TrainedNetwork(NetworkConfig config, std::vector<DenseLayer> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() + 1 != config_.layer_sizes.size()) throw Error("layer count does not match config");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    if (L.in != config_.layer_sizes[l] || L.out != config_.layer_sizes[l + 1] ||
        L.weights.size() != L.in * L.out || L.bias.size() != L.out) {
      throw Error("layer " + std::to_string(l) + " dimensions do not match config");
    }
    for (double w : L.weights) {
      if (!std::isfinite(w)) throw Error("non-finite weight");
    }
    for (double b : L.bias) {
      if (!std::isfinite(b)) throw Error("non-finite bias");
    }
  }
}

TrainedNetwork TrainedNetwork::zeros(const NetworkConfig& config) {
  config.validate();
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < config.layer_sizes.size(); ++l) {
    layers.push_back(make_layer(config.layer_sizes[l], config.layer_sizes[l + 1]));
  }
  return TrainedNetwork(config, std::move(layers));
}

TrainedNetwork TrainedNetwork::initialize(const NetworkConfig& config) {
  config.validate();
  Rng rng(config.seed);
  return TrainedNetwork(config, he_layers(config, rng));
}

std::vector<double> TrainedNetwork::first_layer_sparse(const SparseRow& row) const {
  check_row(row, n_inputs());
  const auto& L = layers_.front();
  std::vector<double> z(L.bias);
  for (const auto& e : row) {
    const double* w = &L.weights[static_cast<std::size_t>(e.index) * L.out];
    for (std::size_t o = 0; o < L.out; ++o) z[o] += e.value * w[o];
  }
  return z;
}

std::vector<double> TrainedNetwork::first_layer_dense(std::span<const double> input) const {
  if (input.size() != n_inputs()) throw Error("dense input has wrong length");
  const auto& L = layers_.front();
  std::vector<double> z(L.bias);
  for (std::size_t i = 0; i < L.in; ++i) {
    if (input[i] == 0.0) continue;
    const double* w = &L.weights[i * L.out];
    for (std::size_t o = 0; o < L.out; ++o) z[o] += input[i] * w[o];
  }
  return z;
}

TrainedNetwork::Pass TrainedNetwork::forward_from_first(std::vector<double> first_pre) const {
  Pass pass;
  pass.pre.resize(layers_.size());
  pass.act.resize(layers_.size());
  pass.pre[0] = std::move(first_pre);
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    auto& a = pass.act[l - 1];
    a.resize(pass.pre[l - 1].size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::max(0.0, pass.pre[l - 1][i]);
    const auto& L = layers_[l];
    std::vector<double> z(L.bias);
    for (std::size_t i = 0; i < L.in; ++i) {
      if (a[i] == 0.0) continue;
      const double* w = &L.weights[i * L.out];
      for (std::size_t o = 0; o < L.out; ++o) z[o] += a[i] * w[o];
    }
    pass.pre[l] = std::move(z);
  }
  pass.probabilities = softmax(pass.pre.back());
  return pass;
}

std::vector<double> TrainedNetwork::first_layer_delta(const Pass& pass, ClassIndex output) const {
  if (output >= n_outputs()) throw Error("output index out of range");
  const auto& p = pass.probabilities;
  // d p_n / d z_c = p_n (delta_nc - p_c)
  std::vector<double> delta(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) delta[c] = p[output] * ((c == output ? 1.0 : 0.0) - p[c]);
  for (std::size_t l = layers_.size() - 1; l >= 1; --l) {
    const auto& L = layers_[l];
    const auto& below = pass.pre[l - 1];
    std::vector<double> next(L.in, 0.0);
    for (std::size_t i = 0; i < L.in; ++i) {
      if (!(below[i] > 0.0)) continue;
      const double* w = &L.weights[i * L.out];
      double s = 0.0;
      for (std::size_t o = 0; o < L.out; ++o) s += w[o] * delta[o];
      next[i] = s;
    }
    delta = std::move(next);
  }
  return delta;
}

Prediction TrainedNetwork::predict(const SparseRow& row) const {
  auto pass = forward_from_first(first_layer_sparse(row));
  const auto m = argmax(pass.probabilities);
  return {std::move(pass.probabilities), m};
}

Prediction TrainedNetwork::predict_dense(std::span<const double> input) const {
  auto pass = forward_from_first(first_layer_dense(input));
  const auto m = argmax(pass.probabilities);
  return {std::move(pass.probabilities), m};
}

namespace {

void project_to_inputs(const DenseLayer& first, std::span<const double> delta, std::span<double> out) {
  for (std::size_t k = 0; k < first.in; ++k) {
    const double* w = &first.weights[k * first.out];
    double s = 0.0;
    for (std::size_t h = 0; h < first.out; ++h) s += w[h] * delta[h];
    out[k] = s;
  }
}

}  // namespace

std::vector<double> TrainedNetwork::input_gradient(const SparseRow& row, ClassIndex output) const {
  const auto pass = forward_from_first(first_layer_sparse(row));
  const auto delta = first_layer_delta(pass, output);
  std::vector<double> g(n_inputs());
  project_to_inputs(layers_.front(), delta, g);
  return g;
}

std::vector<double> TrainedNetwork::input_gradient_dense(std::span<const double> input,
                                                         ClassIndex output) const {
  const auto pass = forward_from_first(first_layer_dense(input));
  const auto delta = first_layer_delta(pass, output);
  std::vector<double> g(n_inputs());
  project_to_inputs(layers_.front(), delta, g);
  return g;
}

void TrainedNetwork::input_gradient_at(const SparseRow& row, ClassIndex output,
                                       std::span<const FeatureIndex> features, std::span<double> out) const {
  if (out.size() != features.size()) throw Error("gradient output span has wrong length");
  const auto pass = forward_from_first(first_layer_sparse(row));
  const auto delta = first_layer_delta(pass, output);
  const auto& first = layers_.front();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i] >= first.in) throw Error("feature index out of range");
    const double* w = &first.weights[static_cast<std::size_t>(features[i]) * first.out];
    double s = 0.0;
    for (std::size_t h = 0; h < first.out; ++h) s += w[h] * delta[h];
    out[i] = s;
  }
}

void TrainedNetwork::input_gradient_all(const SparseRow& row, std::span<double> out) const {
  const std::size_t K = n_inputs();
  const std::size_t C = n_outputs();
  if (out.size() != K * C) throw Error("gradient output span has wrong length");
  const auto pass = forward_from_first(first_layer_sparse(row));
  const auto& first = layers_.front();
  std::vector<double> deltas(C * first.out);
  for (std::size_t n = 0; n < C; ++n) {
    const auto d = first_layer_delta(pass, n);
    std::copy(d.begin(), d.end(), deltas.begin() + static_cast<std::ptrdiff_t>(n * first.out));
  }
  for (std::size_t k = 0; k < K; ++k) {
    const double* w = &first.weights[k * first.out];
    for (std::size_t n = 0; n < C; ++n) {
      const double* d = &deltas[n * first.out];
      double s = 0.0;
      for (std::size_t h = 0; h < first.out; ++h) s += w[h] * d[h];
      out[n * K + k] = s;
    }
  }
}

// Checkpoint: magic line, "key value" config lines up to "end", then every
// layer's weights and biases as little-endian IEEE-754 doubles.

namespace {

void write_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes, 8);
}

double read_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("truncated network checkpoint");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void TrainedNetwork::save(std::ostream& out) const {
  out << kNetworkMagic << '\n';
  out << "layers";
  for (auto s : config_.layer_sizes) out << ' ' << s;
  out << '\n';
  out << "epochs " << config_.epochs << '\n';
  out << "batch_size " << config_.batch_size << '\n';
  out << "learning_rate " << format_double(config_.adam.learning_rate) << '\n';
  out << "beta1 " << format_double(config_.adam.beta1) << '\n';
  out << "beta2 " << format_double(config_.adam.beta2) << '\n';
  out << "epsilon " << format_double(config_.adam.epsilon) << '\n';
  out << "seed " << config_.seed << '\n';
  out << "end\n";
  for (const auto& L : layers_) {
    for (double w : L.weights) write_le(out, w);
    for (double b : L.bias) write_le(out, b);
  }
}

TrainedNetwork TrainedNetwork::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kNetworkMagic) throw IoError("not a network checkpoint");
  NetworkConfig config;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    std::string value;
    auto next = [&]() -> std::string {
      if (!(fields >> value)) throw IoError("checkpoint config line missing value: " + line);
      return value;
    };
    try {
      if (key == "layers") {
        while (fields >> value) config.layer_sizes.push_back(std::stoull(value));
      } else if (key == "epochs") {
        config.epochs = std::stoull(next());
      } else if (key == "batch_size") {
        config.batch_size = std::stoull(next());
      } else if (key == "learning_rate") {
        config.adam.learning_rate = parse_double(next());
      } else if (key == "beta1") {
        config.adam.beta1 = parse_double(next());
      } else if (key == "beta2") {
        config.adam.beta2 = parse_double(next());
      } else if (key == "epsilon") {
        config.adam.epsilon = parse_double(next());
      } else if (key == "seed") {
        config.seed = std::stoull(next());
      } else {
        throw IoError("unknown checkpoint config key: " + key);
      }
    } catch (const std::logic_error&) {
      throw IoError("malformed checkpoint config line: " + line);
    }
  }
  if (!ended) throw IoError("checkpoint config block not terminated");
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid checkpoint config: ") + e.what());
  }
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < config.layer_sizes.size(); ++l) {
    auto layer = make_layer(config.layer_sizes[l], config.layer_sizes[l + 1]);
    for (auto& w : layer.weights) w = read_le(in);
    for (auto& b : layer.bias) b = read_le(in);
    layers.push_back(std::move(layer));
  }
  return TrainedNetwork(std::move(config), std::move(layers));
}

void TrainedNetwork::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  save(out);
  if (!out) throw IoError("write failed: " + path.string());
}

TrainedNetwork TrainedNetwork::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

namespace {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

void adam_update(std::vector<double>& params, const std::vector<double>& grad, AdamState& st,
                 const AdamConfig& cfg, double correction1, double correction2) {
  const double b1 = cfg.beta1;
  const double b2 = cfg.beta2;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * g;
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * g * g;
    const double mhat = st.m[i] / correction1;
    const double vhat = st.v[i] / correction2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace

TrainedNetwork train_network(const FeatureMatrix& train, const NetworkConfig& config, TrainingReport* report) {
  config.validate();
  if (train.n_features != config.n_inputs()) {
    throw Error("training matrix has " + std::to_string(train.n_features) + " features, network expects " +
                std::to_string(config.n_inputs()));
  }
  if (!train.has_labels() || train.size() == 0) throw Error("training requires labeled, non-empty data");
  for (auto y : train.labels) {
    if (y >= config.n_outputs()) throw Error("label index exceeds number of network outputs");
  }
  for (const auto& row : train.rows) check_row(row, config.n_inputs());

  // Initialization and shuffling share one generator seeded from the config.
  Rng rng(config.seed);
  auto layers = he_layers(config, rng);
  const std::size_t L = layers.size();

  std::vector<AdamState> w_state(L), b_state(L);
  std::vector<std::vector<double>> w_grad(L), b_grad(L);
  for (std::size_t l = 0; l < L; ++l) {
    w_state[l] = {std::vector<double>(layers[l].weights.size()), std::vector<double>(layers[l].weights.size())};
    b_state[l] = {std::vector<double>(layers[l].bias.size()), std::vector<double>(layers[l].bias.size())};
    w_grad[l].assign(layers[l].weights.size(), 0.0);
    b_grad[l].assign(layers[l].bias.size(), 0.0);
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t step = 0;
  double pow1 = 1.0;
  double pow2 = 1.0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < L; ++l) {
        std::fill(w_grad[l].begin(), w_grad[l].end(), 0.0);
        std::fill(b_grad[l].begin(), b_grad[l].end(), 0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t s = start; s < end; ++s) {
        const auto& row = train.rows[order[s]];
        const auto y = train.labels[order[s]];
        // forward
        std::vector<std::vector<double>> pre(L), act(L);
        {
          const auto& F = layers[0];
          pre[0] = F.bias;
          for (const auto& e : row) {
            const double* w = &F.weights[static_cast<std::size_t>(e.index) * F.out];
            for (std::size_t o = 0; o < F.out; ++o) pre[0][o] += e.value * w[o];
          }
        }
        for (std::size_t l = 1; l < L; ++l) {
          act[l - 1].resize(pre[l - 1].size());
          for (std::size_t i = 0; i < act[l - 1].size(); ++i) act[l - 1][i] = std::max(0.0, pre[l - 1][i]);
          const auto& W = layers[l];
          pre[l] = W.bias;
          for (std::size_t i = 0; i < W.in; ++i) {
            const double a = act[l - 1][i];
            if (a == 0.0) continue;
            const double* w = &W.weights[i * W.out];
            for (std::size_t o = 0; o < W.out; ++o) pre[l][o] += a * w[o];
          }
        }
        const auto& logits = pre[L - 1];
        const double top = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (double z : logits) sum += std::exp(z - top);
        const double log_norm = top + std::log(sum);
        batch_loss += log_norm - logits[y];

        // backward: delta = (softmax - onehot) / batch
        std::vector<double> delta(logits.size());
        for (std::size_t c = 0; c < logits.size(); ++c) {
          delta[c] = (std::exp(logits[c] - log_norm) - (c == y ? 1.0 : 0.0)) * inv_batch;
        }
        for (std::size_t l = L - 1; l >= 1; --l) {
          const auto& W = layers[l];
          const auto& a = act[l - 1];
          for (std::size_t o = 0; o < W.out; ++o) b_grad[l][o] += delta[o];
          std::vector<double> next(W.in, 0.0);
          for (std::size_t i = 0; i < W.in; ++i) {
            if (a[i] == 0.0) continue;
            double* g = &w_grad[l][i * W.out];
            const double* w = &W.weights[i * W.out];
            double s2 = 0.0;
            for (std::size_t o = 0; o < W.out; ++o) {
              g[o] += a[i] * delta[o];
              s2 += w[o] * delta[o];
            }
            next[i] = pre[l - 1][i] > 0.0 ? s2 : 0.0;
          }
          delta = std::move(next);
        }
        const auto& F = layers[0];
        for (std::size_t o = 0; o < F.out; ++o) b_grad[0][o] += delta[o];
        for (const auto& e : row) {
          double* g = &w_grad[0][static_cast<std::size_t>(e.index) * F.out];
          for (std::size_t o = 0; o < F.out; ++o) g[o] += e.value * delta[o];
        }
      }
      if (!std::isfinite(batch_loss)) throw Error("training diverged");
      epoch_loss += batch_loss;

      ++step;
      pow1 *= config.adam.beta1;
      pow2 *= config.adam.beta2;
      const double c1 = 1.0 - pow1;
      const double c2 = 1.0 - pow2;
      for (std::size_t l = 0; l < L; ++l) {
        adam_update(layers[l].weights, w_grad[l], w_state[l], config.adam, c1, c2);
        adam_update(layers[l].bias, b_grad[l], b_state[l], config.adam, c1, c2);
      }
    }
    epoch_loss /= static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss)) throw Error("training diverged");
    if (report) report->epoch_loss.push_back(epoch_loss);
    spdlog::debug("epoch {}: loss {:.6f}", epoch + 1, epoch_loss);
  }
  for (const auto& layer : layers) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) throw Error("training diverged");
    }
  }
  return TrainedNetwork(config, std::move(layers));
}

std::vector<ClassIndex> predict_all(const TrainedNetwork& net, const FeatureMatrix& m) {
  std::vector<ClassIndex> out;
  out.reserve(m.size());
  for (const auto& row : m.rows) out.push_back(net.predict(row).predicted);
  return out;
}

}  // namespace gradrules
