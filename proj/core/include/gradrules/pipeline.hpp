#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gradrules/config.hpp"
#include "gradrules/explain.hpp"
#include "gradrules/ripper.hpp"
#include "gradrules/select.hpp"
#include "gradrules/sparse_text.hpp"

namespace spdlog {
class logger;
}

namespace gradrules {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

/// Everything a finished run reports.
struct PipelineSummary {
  std::vector<std::string> classes;
  FidelityReport classifier;  // model predictions against gold test labels
  FidelityReport fidelity;    // best rule-sets against the explained targets
  ConsistencyReport consistency;
  std::size_t n_selected = 0;
  std::size_t n_explained = 0;
};

/// The explained instances restricted to the selected features, with the
/// targets the rule-sets are fit to.
struct ExplainedData {
  std::vector<std::string> classes;
  InductionData data;
  std::vector<ClassIndex> targets;
};

/// Stage-by-stage driver writing into `config.out`:
///
///     train.fm dev.fm test.fm   featurized splits
///     model.net                 trained classifier
///     explain.sm train.sm       sign matrices (labels: targets / gold)
///     selection.tsv             selected features
///     rules/<class>.json|.txt   best rule-set per class
///     fidelity.json consistency.json sweep.csv
///     config.txt run.log
///
/// Each stage records a stamp of its inputs under stamps/ and is skipped
/// when the stamp and its artifacts are present and unchanged. Every stage
/// runs its prerequisites first.
class Pipeline {
 public:
  /// Validates the configuration and creates the output directory.
  explicit Pipeline(RunConfig config);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& dir() const { return config_.out; }

  std::string featurize();
  std::string train();
  std::string saliency();
  std::string select();
  /// Full sweep, reports and best rule-sets.
  PipelineSummary explain();
  /// A single one-vs-rest induction at (config seed, min_cover) written to
  /// rules/; returns its fidelity.
  FidelityReport induce(std::size_t min_cover);

  /// Model predictions on the gold-labeled test split.
  FidelityReport evaluate_classifier();
  /// Runs the stages up to selection, then loads the explained data.
  ExplainedData explained_data();
  /// Loads the explained data from existing artifacts without running any
  /// stage; throws IoError when they are missing.
  ExplainedData load_explained_data() const;

  /// Names and counts of the stages actually executed (not skipped) so far.
  const std::vector<std::string>& executed_stages() const { return executed_; }

 private:
  bool up_to_date(std::string_view stage, const std::string& stamp,
                  std::initializer_list<std::filesystem::path> artifacts) const;
  void mark_done(std::string_view stage, const std::string& stamp);
  std::filesystem::path path(std::string_view name) const { return config_.out / name; }
  void write_rules(const std::vector<RuleSet>& rulesets, const InductionData& data);

  RunConfig config_;
  std::shared_ptr<spdlog::logger> previous_logger_;
  std::vector<std::string> executed_;
};

/// Convenience wrapper: Pipeline(config).explain().
PipelineSummary run_pipeline(const RunConfig& config);

/// Filesystem-safe form of a class name for rules/<class>.json.
std::string class_file_stem(std::string_view class_name);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gradrules
