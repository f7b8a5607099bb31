#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "gradrules/common.hpp"
#include "gradrules/sparse.hpp"

namespace gradrules {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// Feedforward ReLU classifier shape and training schedule.
/// `layer_sizes` is {inputs, hidden..., classes}; the default explained
/// model is {K, 100, 100, C}.
struct NetworkConfig {
  std::vector<std::size_t> layer_sizes;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 1;

  std::size_t n_inputs() const { return layer_sizes.front(); }
  std::size_t n_outputs() const { return layer_sizes.back(); }

  /// Throws ConfigError on fewer than 2 outputs, zero epochs, empty layers.
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Fully connected layer. `weights` is row-major in x out: row i holds the
/// outgoing weights of input unit i.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t i, std::size_t o) { return weights[i * out + o]; }
  double w(std::size_t i, std::size_t o) const { return weights[i * out + o]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Prediction {
  std::vector<double> probabilities;
  ClassIndex predicted = 0;  // argmax, lowest index on ties
};

/// Index of the largest value; the first one wins ties.
ClassIndex argmax(std::span<const double> values);

/// Immutable trained classifier. ReLU hidden layers, softmax output.
///
/// Input gradients are of the post-softmax probability of one output node,
/// computed exactly by backpropagation in double precision.
class TrainedNetwork {
 public:
  TrainedNetwork(NetworkConfig config, std::vector<DenseLayer> layers);

  /// All weights and biases zero.
  static TrainedNetwork zeros(const NetworkConfig& config);
  /// He-initialized weights (normal, variance 2 / fan_in), zero biases.
  static TrainedNetwork initialize(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t n_inputs() const { return config_.n_inputs(); }
  std::size_t n_outputs() const { return config_.n_outputs(); }

  Prediction predict(const SparseRow& row) const;
  Prediction predict_dense(std::span<const double> input) const;

  /// d p_output / d input_k for every k (dense, length n_inputs()).
  std::vector<double> input_gradient(const SparseRow& row, ClassIndex output) const;
  std::vector<double> input_gradient_dense(std::span<const double> input, ClassIndex output) const;

  /// Same gradient evaluated only at `features`; writes features.size() values.
  void input_gradient_at(const SparseRow& row, ClassIndex output, std::span<const FeatureIndex> features,
                         std::span<double> out) const;

  /// Gradients of every output node: out[n * n_inputs() + k] = d p_n / d input_k.
  void input_gradient_all(const SparseRow& row, std::span<double> out) const;

  void save(std::ostream& out) const;
  static TrainedNetwork load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static TrainedNetwork load(const std::filesystem::path& path);

  friend bool operator==(const TrainedNetwork&, const TrainedNetwork&) = default;

 private:
  struct Pass {
    std::vector<std::vector<double>> pre;  // pre-activations per layer
    std::vector<std::vector<double>> act;  // activations per layer (act[0] unused for input)
    std::vector<double> probabilities;
  };

  Pass forward_from_first(std::vector<double> first_pre) const;
  std::vector<double> first_layer_sparse(const SparseRow& row) const;
  std::vector<double> first_layer_dense(std::span<const double> input) const;
  /// Backpropagates d p_output / d logits down to the first layer's pre-activation.
  std::vector<double> first_layer_delta(const Pass& pass, ClassIndex output) const;

  NetworkConfig config_;
  std::vector<DenseLayer> layers_;
};

inline constexpr std::string_view kNetworkMagic = "GRADRULES-NET v1";

struct TrainingReport {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Mini-batch Adam on softmax cross-entropy. Deterministic for a given
/// config seed: the seed drives initialization and per-epoch shuffles.
/// Throws Error("training diverged") on a non-finite loss.
TrainedNetwork train_network(const FeatureMatrix& train, const NetworkConfig& config,
                             TrainingReport* report = nullptr);

/// Predicted class per row.
std::vector<ClassIndex> predict_all(const TrainedNetwork& net, const FeatureMatrix& m);

}  // namespace gradrules
