#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gradrules/corpus.hpp"
#include "gradrules/net.hpp"
#include "gradrules/transform.hpp"

namespace gradrules {

enum class SelectorKind { SensitivityAnalysis, MutualInformation };

struct FeatureScores {
  std::vector<double> scores;  // one per feature, >= 0
  SelectorKind method = SelectorKind::MutualInformation;
};

/// Unsupervised score: for every output node n the root mean square over
/// instances of d p_n / d input_k, then the maximum over n.
/// Throws Error on an empty matrix.
FeatureScores sensitivity_scores(const TrainedNetwork& net, const FeatureMatrix& inputs);

/// Plug-in mutual information in nats of a joint count table laid out
/// row-major as n_x by n_y. Returns 0 for an empty table.
double mutual_information(std::span<const std::uint64_t> joint_counts, std::size_t n_x, std::size_t n_y);

/// MI between each feature's sign value {-1, 0, 1} and the class label.
FeatureScores mutual_information_scores(const SignMatrix& signs, std::span<const ClassIndex> labels,
                                        std::size_t n_classes);

struct SelectionResult {
  std::vector<FeatureIndex> indices;  // descending score, ascending index on ties
  std::size_t k = 0;
};

/// Top-k features. k larger than the feature count selects everything
/// (with a warning). Throws ConfigError for k == 0.
SelectionResult select_top_k(const FeatureScores& scores, std::size_t k = 1000);

/// One "index<TAB>term<TAB>score" line per selected feature.
void save_selection(const std::filesystem::path& path, const SelectionResult& selection,
                    const FeatureScores& scores, const Vocabulary& vocabulary);

struct SelectionFile {
  std::vector<FeatureIndex> indices;
  std::vector<std::string> terms;
  std::vector<double> scores;
};
SelectionFile load_selection(const std::filesystem::path& path);

}  // namespace gradrules
