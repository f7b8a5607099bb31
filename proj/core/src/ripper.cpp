#include "gradrules/ripper.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gradrules/rng.hpp"

namespace gradrules {

InductionData::InductionData(std::size_t n_rows, std::vector<double> values, std::vector<FeatureKind> kinds,
                             std::vector<std::string> names, std::vector<FeatureIndex> sources)
    : n_rows_(n_rows),
      values_(std::move(values)),
      kinds_(std::move(kinds)),
      names_(std::move(names)),
      sources_(std::move(sources)) {
  const std::size_t F = kinds_.size();
  if (values_.size() != n_rows_ * F) throw Error("induction data: value count does not match shape");
  if (names_.size() != F) throw Error("induction data: one name per feature required");
  if (sources_.empty()) {
    sources_.resize(F);
    std::iota(sources_.begin(), sources_.end(), FeatureIndex{0});
  }
  if (sources_.size() != F) throw Error("induction data: one source index per feature required");
  for (std::size_t f = 0; f < F; ++f) {
    if (!source_to_column_.emplace(sources_[f], f).second) throw Error("induction data: duplicate source index");
  }
  row_start_.reserve(n_rows_ + 1);
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t f = 0; f < F; ++f) {
      const double v = values_[r * F + f];
      if (!std::isfinite(v)) throw Error("induction data: non-finite value");
      if (kinds_[f] == FeatureKind::Discrete && v != -1.0 && v != 0.0 && v != 1.0) {
        throw Error("induction data: discrete values must be -1, 0 or 1");
      }
      if (v != 0.0) cells_.push_back({static_cast<std::uint32_t>(f), v});
    }
    row_start_.push_back(cells_.size());
  }
}

namespace {

std::vector<std::ptrdiff_t> column_lookup(std::size_t n_features, std::span<const FeatureIndex> selected) {
  std::vector<std::ptrdiff_t> col(n_features, -1);
  for (std::size_t c = 0; c < selected.size(); ++c) {
    if (selected[c] >= n_features) throw Error("selected feature index out of range");
    col[selected[c]] = static_cast<std::ptrdiff_t>(c);
  }
  return col;
}

std::vector<std::string> selected_names(std::span<const FeatureIndex> selected, const Vocabulary& vocabulary) {
  std::vector<std::string> names;
  names.reserve(selected.size());
  for (auto idx : selected) names.push_back(idx < vocabulary.size() ? vocabulary.term(idx) : "f" + std::to_string(idx));
  return names;
}

}  // namespace

InductionData InductionData::from_signs(const SignMatrix& signs, std::span<const FeatureIndex> selected,
                                        const Vocabulary& vocabulary) {
  const auto col = column_lookup(signs.n_features, selected);
  const std::size_t F = selected.size();
  std::vector<double> values(signs.size() * F, 0.0);
  for (std::size_t r = 0; r < signs.size(); ++r) {
    for (const auto& e : signs.rows[r]) {
      if (e.index < col.size() && col[e.index] >= 0) values[r * F + static_cast<std::size_t>(col[e.index])] = e.sign;
    }
  }
  return {signs.size(), std::move(values), std::vector<FeatureKind>(F, FeatureKind::Discrete),
          selected_names(selected, vocabulary), {selected.begin(), selected.end()}};
}

InductionData InductionData::from_features(const FeatureMatrix& m, std::span<const FeatureIndex> selected,
                                           const Vocabulary& vocabulary) {
  const auto col = column_lookup(m.n_features, selected);
  const std::size_t F = selected.size();
  std::vector<double> values(m.size() * F, 0.0);
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (const auto& e : m.rows[r]) {
      if (e.index < col.size() && col[e.index] >= 0) values[r * F + static_cast<std::size_t>(col[e.index])] = e.value;
    }
  }
  return {m.size(), std::move(values), std::vector<FeatureKind>(F, FeatureKind::Numeric),
          selected_names(selected, vocabulary), {selected.begin(), selected.end()}};
}

std::optional<std::size_t> InductionData::column_of_source(FeatureIndex source) const {
  const auto it = source_to_column_.find(source);
  if (it == source_to_column_.end()) return std::nullopt;
  return it->second;
}

void RipperConfig::validate() const {
  if (min_cover < 1) throw ConfigError("min_cover must be >= 1");
  if (optimization_rounds > 5) throw ConfigError("optimization rounds must lie in 0..5");
  if (!(grow_fraction > 0.0 && grow_fraction < 1.0)) throw ConfigError("grow_fraction must lie in (0, 1)");
}

double foil_gain(double p1, double n1, double p0, double n0) {
  if (p1 <= 0.0) return -std::numeric_limits<double>::infinity();
  return p1 * (std::log2(p1 / (p1 + n1)) - std::log2(p0 / (p0 + n0)));
}

namespace {

struct Counts {
  std::size_t p = 0;
  std::size_t n = 0;
};

Counts count_covered(const Rule& rule, const InductionData& data, BinaryLabels positive,
                     std::span<const std::size_t> rows) {
  Counts c;
  for (auto r : rows) {
    if (!rule.covers(data, r)) continue;
    if (positive[r]) ++c.p; else ++c.n;
  }
  return c;
}

bool has_positive(BinaryLabels positive, std::span<const std::size_t> rows) {
  return std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return positive[r] != 0; });
}

struct Candidate {
  double gain = 0.0;  // only strictly positive gains are taken
  Condition condition;
  bool found = false;
};

class Grower {
 public:
  Grower(const InductionData& data, BinaryLabels positive) : data_(data), positive_(positive) {
    discrete_.assign(data.features() * 4, 0);
    numeric_.resize(data.features());
  }

  Rule run(std::span<const std::size_t> grow_rows, Rule rule) {
    const std::size_t F = data_.features();
    std::vector<std::uint8_t> used(F, 0);
    for (const auto& c : rule.conditions) used.at(c.feature) = 1;
    std::vector<std::size_t> covered;
    for (auto r : grow_rows) {
      if (rule.covers(data_, r)) covered.push_back(r);
    }
    while (true) {
      std::size_t p0 = 0, n0 = 0;
      for (auto r : covered) (positive_[r] ? p0 : n0) += 1;
      if (p0 == 0 || n0 == 0) break;
      tally(covered);
      Candidate best;
      for (std::size_t f = 0; f < F; ++f) {
        if (used[f]) continue;
        if (data_.kind(f) == FeatureKind::Discrete) {
          consider_discrete(f, p0, n0, best);
        } else {
          consider_numeric(f, p0, n0, best);
        }
      }
      if (!best.found) break;
      rule.conditions.push_back(best.condition);
      used[best.condition.feature] = 1;
      std::erase_if(covered, [&](std::size_t r) {
        return !best.condition.holds(data_.value(r, best.condition.feature));
      });
    }
    return rule;
  }

 private:
  // discrete_[f*4 + {0: pos at -1, 1: neg at -1, 2: pos at +1, 3: neg at +1}]
  void tally(std::span<const std::size_t> covered) {
    std::fill(discrete_.begin(), discrete_.end(), 0);
    for (auto& v : numeric_) v.clear();
    for (auto r : covered) {
      const bool pos = positive_[r] != 0;
      for (const auto& cell : data_.nonzeros(r)) {
        if (data_.kind(cell.feature) == FeatureKind::Discrete) {
          const std::size_t slot = (cell.value > 0 ? 2 : 0) + (pos ? 0 : 1);
          ++discrete_[cell.feature * 4 + slot];
        } else {
          numeric_[cell.feature].push_back({cell.value, pos});
        }
      }
    }
  }

  void offer(Candidate& best, std::size_t f, ConditionOp op, double value, std::size_t p1, std::size_t n1,
             std::size_t p0, std::size_t n0) const {
    const double g = foil_gain(static_cast<double>(p1), static_cast<double>(n1), static_cast<double>(p0),
                               static_cast<double>(n0));
    if (g > best.gain) {
      best.gain = g;
      best.condition = {f, op, value};
      best.found = true;
    }
  }

  void consider_discrete(std::size_t f, std::size_t p0, std::size_t n0, Candidate& best) const {
    const auto* c = &discrete_[f * 4];
    const std::size_t pz = p0 - c[0] - c[2];
    const std::size_t nz = n0 - c[1] - c[3];
    offer(best, f, ConditionOp::Equals, -1.0, c[0], c[1], p0, n0);
    offer(best, f, ConditionOp::Equals, 0.0, pz, nz, p0, n0);
    offer(best, f, ConditionOp::Equals, 1.0, c[2], c[3], p0, n0);
  }

  void consider_numeric(std::size_t f, std::size_t p0, std::size_t n0, Candidate& best) {
    auto& vals = numeric_[f];
    std::size_t pz = p0, nz = n0;
    for (const auto& v : vals) (v.positive ? pz : nz) -= 1;
    if (pz + nz > 0) vals.push_back({0.0, true});  // placeholder for the zero bucket
    std::sort(vals.begin(), vals.end(), [](const Value& a, const Value& b) { return a.x < b.x; });

    levels_.clear();
    bool zero_added = false;
    for (const auto& v : vals) {
      if (levels_.empty() || levels_.back().x != v.x) levels_.push_back({v.x, 0, 0});
      if (v.x == 0.0) {
        if (!zero_added) {
          levels_.back().p += pz;
          levels_.back().n += nz;
          zero_added = true;
        }
        continue;
      }
      (v.positive ? levels_.back().p : levels_.back().n) += 1;
    }
    std::size_t cp = 0, cn = 0;
    for (const auto& l : levels_) {
      cp += l.p;
      cn += l.n;
      offer(best, f, ConditionOp::LessEq, l.x, cp, cn, p0, n0);
    }
    cp = p0;
    cn = n0;
    for (const auto& l : levels_) {
      offer(best, f, ConditionOp::GreaterEq, l.x, cp, cn, p0, n0);
      cp -= l.p;
      cn -= l.n;
    }
  }

  struct Value {
    double x;
    bool positive;
  };
  struct Level {
    double x;
    std::size_t p;
    std::size_t n;
  };

  const InductionData& data_;
  BinaryLabels positive_;
  std::vector<std::size_t> discrete_;
  std::vector<std::vector<Value>> numeric_;
  std::vector<Level> levels_;
};

struct Split {
  std::vector<std::size_t> grow;
  std::vector<std::size_t> prune;
};

Split stratified_split(std::span<const std::size_t> rows, BinaryLabels positive, double fraction, Rng& rng) {
  std::vector<std::size_t> order(rows.begin(), rows.end());
  rng.shuffle(order);
  std::vector<std::size_t> pos, neg;
  for (auto r : order) (positive[r] ? pos : neg).push_back(r);
  const auto take = [fraction](std::size_t n) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  };
  Split s;
  const std::size_t gp = take(pos.size()), gn = take(neg.size());
  s.grow.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(gp));
  s.grow.insert(s.grow.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(gn));
  s.prune.assign(pos.begin() + static_cast<std::ptrdiff_t>(gp), pos.end());
  s.prune.insert(s.prune.end(), neg.begin() + static_cast<std::ptrdiff_t>(gn), neg.end());
  return s;
}

// (p - n) / (p + n) compared exactly; an empty cover counts as 0.
bool prune_better(Counts a, Counts b) {
  const auto num = [](Counts c) { return static_cast<std::int64_t>(c.p) - static_cast<std::int64_t>(c.n); };
  const auto den = [](Counts c) { return c.p + c.n == 0 ? std::int64_t{1} : static_cast<std::int64_t>(c.p + c.n); };
  return num(a) * den(b) > num(b) * den(a);
}

}  // namespace

Rule grow_rule(const InductionData& data, BinaryLabels positive, std::span<const std::size_t> grow_rows, Rule start) {
  if (positive.size() != data.rows()) throw Error("grow: one label per instance required");
  if (!has_positive(positive, grow_rows)) throw Error("grow: no positive instance in the growing set");
  Grower g(data, positive);
  return g.run(grow_rows, std::move(start));
}

double prune_value(std::size_t p, std::size_t n) {
  if (p + n == 0) return 0.0;
  return (static_cast<double>(p) - static_cast<double>(n)) / static_cast<double>(p + n);
}

Rule prune_rule(Rule rule, const InductionData& data, BinaryLabels positive, std::span<const std::size_t> prune_rows) {
  const std::size_t m = rule.conditions.size();
  if (m <= 1) return rule;
  // depth = number of leading conditions an instance satisfies
  std::vector<Counts> at_depth(m + 1);
  for (auto r : prune_rows) {
    std::size_t d = 0;
    while (d < m && rule.conditions[d].holds(data.value(r, rule.conditions[d].feature))) ++d;
    (positive[r] ? at_depth[d].p : at_depth[d].n) += 1;
  }
  Counts suffix;
  Counts best_counts;
  std::size_t best_len = m;
  for (std::size_t len = m; len >= 1; --len) {
    suffix.p += at_depth[len].p;
    suffix.n += at_depth[len].n;
    if (len == m || !prune_better(best_counts, suffix)) {
      best_counts = suffix;
      best_len = len;
    }
  }
  rule.conditions.resize(best_len);
  return rule;
}

std::vector<std::uint8_t> one_vs_rest_labels(std::span<const ClassIndex> labels, ClassIndex target) {
  std::vector<std::uint8_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] == target ? 1 : 0;
  return out;
}

Firing apply_ruleset(const RuleSet& ruleset, const InductionData& data, std::size_t row) {
  for (std::size_t i = 0; i < ruleset.rules.size(); ++i) {
    if (ruleset.rules[i].covers(data, row)) return {true, i};
  }
  return {};
}

void annotate_coverage(RuleSet& ruleset, const InductionData& data, BinaryLabels positive) {
  if (positive.size() != data.rows()) throw Error("annotate: one label per instance required");
  for (auto& r : ruleset.rules) r.coverage = {};
  ruleset.default_coverage = {};
  for (std::size_t row = 0; row < data.rows(); ++row) {
    const auto fire = apply_ruleset(ruleset, data, row);
    Coverage& c = fire.rule ? ruleset.rules[*fire.rule].coverage : ruleset.default_coverage;
    ++c.covered;
    const bool correct = fire.rule ? positive[row] != 0 : positive[row] == 0;
    if (correct) ++c.correct;
  }
}

namespace {

class Inducer {
 public:
  Inducer(const InductionData& data, BinaryLabels positive, const RipperConfig& config, InductionTrace* trace)
      : data_(data), positive_(positive), config_(config), trace_(trace), rng_(config.seed), grower_(data, positive) {}

  std::vector<Rule> run() {
    std::vector<std::size_t> all(data_.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    cover(all);
    for (std::size_t round = 0; round < config_.optimization_rounds; ++round) {
      for (std::size_t i = 0; i < rules_.size(); ++i) optimize(i);
      cover(uncovered_by(rules_.size()));
    }
    enforce_min_cover();
    return std::move(rules_);
  }

 private:
  // Rows not covered by any of the first `count` rules.
  std::vector<std::size_t> uncovered_by(std::size_t count) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < data_.rows(); ++r) {
      bool hit = false;
      for (std::size_t i = 0; i < count && !hit; ++i) hit = rules_[i].covers(data_, r);
      if (!hit) out.push_back(r);
    }
    return out;
  }

  bool accept(const Rule& rule, std::span<const std::size_t> prune_rows, std::span<const std::size_t> remaining) {
    if (rule.conditions.empty()) return false;
    const Counts pc = count_covered(rule, data_, positive_, prune_rows);
    if (pc.p <= pc.n) return false;  // precision must exceed one half
    const std::size_t correct = count_covered(rule, data_, positive_, remaining).p;
    if (correct < config_.min_cover) return false;
    if (trace_) trace_->accepted.push_back({rule, pc.p, pc.n, correct});
    return true;
  }

  void cover(std::vector<std::size_t> remaining) {
    while (has_positive(positive_, remaining)) {
      const Split split = stratified_split(remaining, positive_, config_.grow_fraction, rng_);
      if (!has_positive(positive_, split.grow)) break;
      Rule rule = prune_rule(grower_.run(split.grow, {}), data_, positive_, split.prune);
      if (!accept(rule, split.prune, remaining)) break;
      std::erase_if(remaining, [&](std::size_t r) { return rule.covers(data_, r); });
      rules_.push_back(std::move(rule));
    }
  }

  void optimize(std::size_t i) {
    const auto base = uncovered_by(i);
    const Split split = stratified_split(base, positive_, config_.grow_fraction, rng_);
    if (!has_positive(positive_, split.grow)) return;

    std::vector<std::uint8_t> later(split.prune.size(), 0);
    for (std::size_t j = 0; j < split.prune.size(); ++j) {
      for (std::size_t q = i + 1; q < rules_.size() && !later[j]; ++q) later[j] = rules_[q].covers(data_, split.prune[j]);
    }
    const auto error = [&](const Rule& candidate) {
      std::size_t e = 0;
      for (std::size_t j = 0; j < split.prune.size(); ++j) {
        const auto r = split.prune[j];
        const bool predicted = later[j] || candidate.covers(data_, r);
        e += predicted != (positive_[r] != 0) ? 1 : 0;
      }
      return e;
    };

    const Rule replacement = prune_rule(grower_.run(split.grow, {}), data_, positive_, split.prune);
    const Rule revision = prune_rule(grower_.run(split.grow, rules_[i]), data_, positive_, split.prune);

    std::size_t best_error = error(rules_[i]);
    const Rule* best = nullptr;
    for (const Rule* variant : {&replacement, &revision}) {
      if (*variant == rules_[i]) continue;
      const std::size_t e = error(*variant);
      if (e < best_error && accept(*variant, split.prune, base)) {
        best_error = e;
        best = variant;
      }
    }
    if (best) rules_[i] = *best;
  }

  // Drops rules that no longer cover min_cover positives first-match.
  void enforce_min_cover() {
    std::vector<std::uint8_t> taken(data_.rows(), 0);
    std::vector<Rule> kept;
    for (auto& rule : rules_) {
      std::size_t correct = 0;
      for (std::size_t r = 0; r < data_.rows(); ++r) {
        if (!taken[r] && positive_[r] && rule.covers(data_, r)) ++correct;
      }
      if (correct < config_.min_cover) continue;
      for (std::size_t r = 0; r < data_.rows(); ++r) {
        if (!taken[r] && rule.covers(data_, r)) taken[r] = 1;
      }
      kept.push_back(std::move(rule));
    }
    rules_ = std::move(kept);
  }

  const InductionData& data_;
  BinaryLabels positive_;
  const RipperConfig& config_;
  InductionTrace* trace_;
  Rng rng_;
  Grower grower_;
  std::vector<Rule> rules_;
};

}  // namespace

RuleSet induce_binary(const InductionData& data, BinaryLabels positive, const RipperConfig& config,
                      InductionTrace* trace) {
  config.validate();
  if (positive.size() != data.rows()) throw Error("induce: one label per instance required");
  RuleSet out;
  out.config = config;
  if (data.rows() > 0) out.rules = Inducer(data, positive, config, trace).run();
  annotate_coverage(out, data, positive);
  return out;
}

std::map<ClassIndex, RuleSet> induce_one_vs_rest(const InductionData& data, std::span<const ClassIndex> labels,
                                                 std::span<const std::string> class_names,
                                                 const RipperConfig& config) {
  if (labels.size() != data.rows()) throw Error("induce: one label per instance required");
  std::vector<std::size_t> prevalence(class_names.size(), 0);
  for (auto y : labels) {
    if (y >= class_names.size()) throw Error("induce: label out of range");
    ++prevalence[y];
  }
  std::vector<ClassIndex> order(class_names.size());
  std::iota(order.begin(), order.end(), ClassIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](ClassIndex a, ClassIndex b) { return prevalence[a] < prevalence[b]; });

  std::map<ClassIndex, RuleSet> out;
  for (auto c : order) {
    const auto positive = one_vs_rest_labels(labels, c);
    RuleSet rs;
    if (prevalence[c] == 0) {
      spdlog::warn("class '{}' has no instances; its rule set is empty", class_names[c]);
      rs.config = config;
      annotate_coverage(rs, data, positive);
    } else {
      if (2 * prevalence[c] > labels.size()) {
        spdlog::warn("class '{}' is the majority class ({} of {})", class_names[c], prevalence[c], labels.size());
      }
      rs = induce_binary(data, positive, config);
    }
    rs.target = c;
    rs.target_name = class_names[c];
    out.emplace(c, std::move(rs));
  }
  return out;
}

}  // namespace gradrules
