#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gradrules/explain.hpp"
#include "gradrules/net.hpp"
#include "gradrules/select.hpp"

namespace gradrules {

/// What is being explained.
///   TestPredictions       the model's predictions on the test split
///   TrainGoldTransformed  gold training labels, gradient-reweighed inputs
///   TrainGoldOriginal     gold training labels, original inputs
enum class ExplainMode { TestPredictions, TrainGoldOriginal, TrainGoldTransformed };

std::string to_string(ExplainMode mode);
std::string to_string(SelectorKind kind);
ExplainMode parse_mode(std::string_view text);
SelectorKind parse_selector(std::string_view text);
/// "ladder", "full" or a comma-separated list of positive integers.
MinCoverGrid parse_min_cover_grid(std::string_view text);
std::string to_string(const MinCoverGrid& grid);

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path out;
  ExplainMode mode = ExplainMode::TestPredictions;
  SelectorKind selector = SelectorKind::MutualInformation;
  std::size_t k = 1000;

  std::vector<std::size_t> hidden_layers{100, 100};
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;

  std::size_t seeds = 50;
  MinCoverGrid min_cover_grid;
  std::size_t optimization_rounds = 2;
  double grow_fraction = 2.0 / 3.0;
  /// Original-input mode only: threshold raw TF-IDF values instead of
  /// presence (0/1) tests.
  bool original_numeric = false;

  std::size_t jobs = 1;
  std::uint64_t seed = 1;

  /// Throws ConfigError on any invalid or missing value.
  void validate() const;

  NetworkConfig network(std::size_t n_inputs, std::size_t n_outputs) const;
  SweepConfig sweep() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Sets one key (the same names serialize_config writes). Throws
/// ConfigError for unknown keys and malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat "key = value" lines; blank lines and lines starting with '#' are
/// ignored. Later keys override earlier ones.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
std::string serialize_config(const RunConfig& config);

}  // namespace gradrules
