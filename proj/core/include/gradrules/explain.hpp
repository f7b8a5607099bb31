#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradrules/ripper.hpp"

namespace gradrules {

struct BinaryScores {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when there are no positives
  double f = 0.0;

  friend bool operator==(const BinaryScores&, const BinaryScores&) = default;
};

BinaryScores binary_scores(std::size_t tp, std::size_t fp, std::size_t fn);

struct FidelityReport {
  std::vector<std::string> class_names;
  std::vector<BinaryScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f = 0.0;

  friend bool operator==(const FidelityReport&, const FidelityReport&) = default;
};

/// Scores of one class's rule-set against `targets == target`.
BinaryScores class_fidelity(const RuleSet& ruleset, const InductionData& data, std::span<const ClassIndex> targets,
                            ClassIndex target);

/// Per-class and macro P/R/F of `rulesets` (one per class, indexed by class)
/// predicting `targets`, typically the explained model's outputs.
FidelityReport fidelity(std::span<const RuleSet> rulesets, const InductionData& data,
                        std::span<const ClassIndex> targets, std::span<const std::string> class_names);

/// Per-class P/R/F of `predicted` labels against `truth`.
FidelityReport label_agreement(std::span<const ClassIndex> predicted, std::span<const ClassIndex> truth,
                               std::span<const std::string> class_names);

/// Minimum-cover grid of a sweep. Ladder is {2, 4, ..., 128}; Full is every
/// value 2..n; Explicit uses `values`. Ladder and Full are capped at the
/// number of positives of the class.
struct MinCoverGrid {
  enum class Kind { Ladder, Full, Explicit };
  Kind kind = Kind::Ladder;
  std::vector<std::size_t> values;

  friend bool operator==(const MinCoverGrid&, const MinCoverGrid&) = default;
};

std::vector<std::size_t> min_cover_values(const MinCoverGrid& grid, std::size_t n_positive);

struct SweepConfig {
  std::vector<std::uint64_t> seeds{1};
  MinCoverGrid grid;
  RipperConfig base;  // seed and min_cover are overridden per cell
  std::size_t jobs = 1;
  double well_performing_margin = 0.01;
};

/// Seeds base, base + 1, ..., base + n - 1.
std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n);

struct SweepCell {
  ClassIndex target = 0;
  std::uint64_t seed = 0;
  std::size_t min_cover = 0;
  BinaryScores scores;
  RuleSet ruleset;
};

struct ClassSweep {
  ClassIndex target = 0;
  std::vector<SweepCell> cells;  // sorted by (seed, min_cover)
  std::size_t best = 0;          // index into cells
  double f_std = 0.0;            // population standard deviation of F over cells
  std::vector<std::size_t> well_performing;  // cells with F >= best F - margin; includes best
};

struct SweepResult {
  std::vector<ClassSweep> classes;  // indexed by class
  FidelityReport best_fidelity;

  std::vector<RuleSet> best_rulesets() const;
};

/// Exhaustive (seed, min_cover) grid per class. Best cell: max F, then
/// smaller min_cover, then smaller seed. Results do not depend on `jobs`.
SweepResult sweep(const InductionData& data, std::span<const ClassIndex> targets,
                  std::span<const std::string> class_names, const SweepConfig& config);

/// Mean over `others` of the percentage of best's rules that occur in the
/// other set, comparing rules as unordered condition sets.
double rule_match(const RuleSet& best, std::span<const RuleSet> others);

/// Mean over `others` of the percentage of instances on which the binary
/// decisions of best and the other set agree. Throws Error on empty data.
double classification_overlap(const RuleSet& best, std::span<const RuleSet> others, const InductionData& data);

struct ClassConsistency {
  ClassIndex target = 0;
  std::string name;
  double best_f = 0.0;
  std::size_t n_well_performing = 0;
  double rule_match = 0.0;
  double overlap = 0.0;
};

struct ConsistencyReport {
  std::vector<ClassConsistency> per_class;
  double mean_rule_match = 0.0;
  double mean_overlap = 0.0;
};

/// Compares each class's best rule-set with the other well-performing ones.
ConsistencyReport consistency(const SweepResult& result, const InductionData& data,
                              std::span<const std::string> class_names);

std::string fidelity_to_json(const FidelityReport& report);
std::string consistency_to_json(const ConsistencyReport& report);
FidelityReport fidelity_from_json(std::string_view json);
ConsistencyReport consistency_from_json(std::string_view json);
/// class,seed,min_cover,P,R,F
std::string sweep_to_csv(const SweepResult& result, std::span<const std::string> class_names);

}  // namespace gradrules
