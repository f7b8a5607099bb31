#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gradrules/common.hpp"
#include "gradrules/corpus.hpp"
#include "gradrules/sparse.hpp"
#include "gradrules/transform.hpp"

namespace gradrules {

/// Discrete features take values in {-1, 0, 1} and are tested with
/// equality; numeric features are tested with <= / >= thresholds.
enum class FeatureKind : std::uint8_t { Discrete, Numeric };

/// Dense instance-by-feature table the rule learner works on, with a
/// per-row list of nonzero cells for fast counting.
class InductionData {
 public:
  struct Cell {
    std::uint32_t feature;
    double value;
  };

  InductionData() = default;
  /// `values` is row-major n_rows x kinds.size(). `sources` maps each column
  /// to its index in the originating feature space (defaults to identity).
  InductionData(std::size_t n_rows, std::vector<double> values, std::vector<FeatureKind> kinds,
                std::vector<std::string> names, std::vector<FeatureIndex> sources = {});

  /// Discrete columns from a sign matrix restricted to `selected`.
  static InductionData from_signs(const SignMatrix& signs, std::span<const FeatureIndex> selected,
                                  const Vocabulary& vocabulary);
  /// Numeric columns holding the raw feature values of `selected`.
  static InductionData from_features(const FeatureMatrix& m, std::span<const FeatureIndex> selected,
                                     const Vocabulary& vocabulary);

  std::size_t rows() const { return n_rows_; }
  std::size_t features() const { return kinds_.size(); }
  double value(std::size_t row, std::size_t feature) const { return values_[row * kinds_.size() + feature]; }
  std::span<const Cell> nonzeros(std::size_t row) const {
    return {cells_.data() + row_start_[row], row_start_[row + 1] - row_start_[row]};
  }
  FeatureKind kind(std::size_t feature) const { return kinds_[feature]; }
  const std::string& name(std::size_t feature) const { return names_[feature]; }
  FeatureIndex source(std::size_t feature) const { return sources_[feature]; }
  std::optional<std::size_t> column_of_source(FeatureIndex source) const;

 private:
  std::size_t n_rows_ = 0;
  std::vector<double> values_;
  std::vector<FeatureKind> kinds_;
  std::vector<std::string> names_;
  std::vector<FeatureIndex> sources_;
  std::vector<Cell> cells_;
  std::vector<std::size_t> row_start_{0};
  std::unordered_map<FeatureIndex, std::size_t> source_to_column_;
};

enum class ConditionOp : std::uint8_t { Equals, LessEq, GreaterEq };

struct Condition {
  std::size_t feature = 0;  // column in InductionData
  ConditionOp op = ConditionOp::Equals;
  double value = 0.0;

  bool holds(double x) const {
    switch (op) {
      case ConditionOp::Equals: return x == value;
      case ConditionOp::LessEq: return x <= value;
      case ConditionOp::GreaterEq: return x >= value;
    }
    return false;
  }

  friend auto operator<=>(const Condition&, const Condition&) = default;
};

/// a of b covered instances belong to the target class.
struct Coverage {
  std::size_t correct = 0;
  std::size_t covered = 0;

  friend bool operator==(const Coverage&, const Coverage&) = default;
};

struct Rule {
  std::vector<Condition> conditions;
  Coverage coverage;

  bool covers(const InductionData& data, std::size_t row) const {
    for (const auto& c : conditions) {
      if (!c.holds(data.value(row, c.feature))) return false;
    }
    return true;
  }

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RipperConfig {
  std::uint64_t seed = 1;
  std::size_t min_cover = 2;           // minimum correctly covered instances per rule
  std::size_t optimization_rounds = 2;  // the k of RIPPER-k
  double grow_fraction = 2.0 / 3.0;

  /// Throws ConfigError unless min_cover >= 1, rounds <= 5 and 0 < grow_fraction < 1.
  void validate() const;

  friend bool operator==(const RipperConfig&, const RipperConfig&) = default;
};

/// Ordered binary rule list for one target class; the final else assigns
/// the negative ("others") label.
struct RuleSet {
  ClassIndex target = 0;
  std::string target_name;
  std::vector<Rule> rules;
  std::string default_name = "others";
  Coverage default_coverage;
  RipperConfig config;

  friend bool operator==(const RuleSet&, const RuleSet&) = default;
};

/// FOIL information gain of specializing a rule covering (p0, n0) to one
/// covering (p1, n1). Negative infinity when p1 == 0.
double foil_gain(double p1, double n1, double p0, double n0);

/// Binary labels: positive[row] != 0 marks the target class.
using BinaryLabels = std::span<const std::uint8_t>;

/// Greedily adds the condition with maximal FOIL gain on `grow_rows`,
/// starting from `start`, until no negatives are covered or no condition
/// has positive gain. Ties go to the smaller feature, then Equals < LessEq
/// < GreaterEq, then the smaller test value. At most one condition per
/// feature. Throws Error if `grow_rows` holds no positive instance.
Rule grow_rule(const InductionData& data, BinaryLabels positive, std::span<const std::size_t> grow_rows,
               Rule start = {});

/// Pruning metric (p - n) / (p + n); zero when nothing is covered.
double prune_value(std::size_t p, std::size_t n);

/// Keeps the prefix of the rule (at least one condition) whose pruning
/// metric on `prune_rows` is highest, preferring the shortest on ties; this
/// is the best of all final-sequence deletions.
Rule prune_rule(Rule rule, const InductionData& data, BinaryLabels positive,
                std::span<const std::size_t> prune_rows);

/// One accepted rule, as seen when the acceptance test passed.
struct AcceptanceRecord {
  Rule rule;
  std::size_t prune_positive = 0;
  std::size_t prune_negative = 0;
  std::size_t correct_on_remaining = 0;
};

struct InductionTrace {
  std::vector<AcceptanceRecord> accepted;
};

/// RIPPER-k for one class against the rest. Deterministic in
/// (data order, labels, config). Coverage counts are annotated first-match
/// on `data`.
RuleSet induce_binary(const InductionData& data, BinaryLabels positive, const RipperConfig& config,
                      InductionTrace* trace = nullptr);

/// One independent binary induction per class, in order of increasing
/// prevalence. Classes absent from `labels` get an empty RuleSet.
std::map<ClassIndex, RuleSet> induce_one_vs_rest(const InductionData& data, std::span<const ClassIndex> labels,
                                                 std::span<const std::string> class_names,
                                                 const RipperConfig& config);

struct Firing {
  bool positive = false;
  std::optional<std::size_t> rule;  // index of the rule that fired; empty for the else branch
};

Firing apply_ruleset(const RuleSet& ruleset, const InductionData& data, std::size_t row);

/// Recomputes every rule's (a/b) and the default coverage, first-match, on `data`.
void annotate_coverage(RuleSet& ruleset, const InductionData& data, BinaryLabels positive);

std::vector<std::uint8_t> one_vs_rest_labels(std::span<const ClassIndex> labels, ClassIndex target);

// Serialization -----------------------------------------------------------

/// JSON with class, rules[{conditions[{feature, term, op, value}], a, b}],
/// default and config. `feature` is the source feature index.
std::string ruleset_to_json(const RuleSet& ruleset, const InductionData& data);

/// Parsed JSON rule-set. Conditions reference source feature indices until
/// bound to a particular InductionData.
struct RuleSetDocument {
  RuleSet ruleset;
  std::map<std::size_t, std::string> terms;  // source index -> term
};

RuleSetDocument ruleset_from_json(std::string_view json);
RuleSetDocument load_ruleset(const std::filesystem::path& path);

/// Maps source feature indices to columns of `data`; throws Error when a
/// referenced feature is not present.
RuleSet bind_ruleset(const RuleSetDocument& doc, const InductionData& data);

/// Human-readable if / elif / else listing, one rule per line:
///   if (just = -1) and (use = 1) ⇒ electronics (24/24)
///   else: others (1134/1281)
std::string render_ruleset(const RuleSet& ruleset, const std::function<std::string(std::size_t)>& name_of);
std::string render_ruleset(const RuleSet& ruleset, const InductionData& data);
std::string render_ruleset(const RuleSetDocument& doc);

}  // namespace gradrules
