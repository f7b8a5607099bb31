#include "gradrules/explain.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <set>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "gradrules/sparse_text.hpp"

namespace gradrules {

BinaryScores binary_scores(std::size_t tp, std::size_t fp, std::size_t fn) {
  BinaryScores s{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0.0) s.f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

BinaryScores class_fidelity(const RuleSet& ruleset, const InductionData& data, std::span<const ClassIndex> targets,
                            ClassIndex target) {
  if (targets.size() != data.rows()) throw Error("fidelity: one target per instance required");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const bool predicted = apply_ruleset(ruleset, data, r).positive;
    const bool truth = targets[r] == target;
    if (predicted && truth) ++tp;
    else if (predicted) ++fp;
    else if (truth) ++fn;
  }
  return binary_scores(tp, fp, fn);
}

namespace {

void fill_macro(FidelityReport& report) {
  const auto n = static_cast<double>(report.per_class.size());
  report.macro_precision = report.macro_recall = report.macro_f = 0.0;
  if (report.per_class.empty()) return;
  for (const auto& s : report.per_class) {
    report.macro_precision += s.precision;
    report.macro_recall += s.recall;
    report.macro_f += s.f;
  }
  report.macro_precision /= n;
  report.macro_recall /= n;
  report.macro_f /= n;
}

}  // namespace

FidelityReport fidelity(std::span<const RuleSet> rulesets, const InductionData& data,
                        std::span<const ClassIndex> targets, std::span<const std::string> class_names) {
  if (rulesets.size() != class_names.size()) throw Error("fidelity: one rule-set per class required");
  FidelityReport report;
  report.class_names.assign(class_names.begin(), class_names.end());
  for (std::size_t c = 0; c < rulesets.size(); ++c) {
    auto s = class_fidelity(rulesets[c], data, targets, c);
    if (s.tp + s.fn == 0) spdlog::warn("class '{}' never occurs among the targets; its F is 0", class_names[c]);
    report.per_class.push_back(s);
  }
  fill_macro(report);
  return report;
}

FidelityReport label_agreement(std::span<const ClassIndex> predicted, std::span<const ClassIndex> truth,
                               std::span<const std::string> class_names) {
  if (predicted.size() != truth.size()) throw Error("label agreement: length mismatch");
  const std::size_t C = class_names.size();
  std::vector<std::size_t> tp(C, 0), fp(C, 0), fn(C, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] >= C || truth[i] >= C) throw Error("label agreement: label out of range");
    if (predicted[i] == truth[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[truth[i]];
    }
  }
  FidelityReport report;
  report.class_names.assign(class_names.begin(), class_names.end());
  for (std::size_t c = 0; c < C; ++c) report.per_class.push_back(binary_scores(tp[c], fp[c], fn[c]));
  fill_macro(report);
  return report;
}

std::vector<std::size_t> min_cover_values(const MinCoverGrid& grid, std::size_t n_positive) {
  std::vector<std::size_t> out;
  switch (grid.kind) {
    case MinCoverGrid::Kind::Ladder:
      for (std::size_t v = 2; v <= 128 && v <= n_positive; v *= 2) out.push_back(v);
      break;
    case MinCoverGrid::Kind::Full:
      for (std::size_t v = 2; v <= n_positive; ++v) out.push_back(v);
      break;
    case MinCoverGrid::Kind::Explicit:
      for (auto v : grid.values) {
        if (v < 1) throw ConfigError("min_cover values must be >= 1");
      }
      out = grid.values;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      if (out.empty()) throw ConfigError("min_cover grid is empty");
      break;
  }
  if (out.empty()) out.push_back(1);
  return out;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = base + i;
  return out;
}

std::vector<RuleSet> SweepResult::best_rulesets() const {
  std::vector<RuleSet> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.cells.at(c.best).ruleset);
  return out;
}

SweepResult sweep(const InductionData& data, std::span<const ClassIndex> targets,
                  std::span<const std::string> class_names, const SweepConfig& config) {
  if (config.seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (targets.size() != data.rows()) throw Error("sweep: one target per instance required");
  config.base.validate();
  const std::size_t C = class_names.size();
  std::vector<std::size_t> prevalence(C, 0);
  for (auto t : targets) {
    if (t >= C) throw Error("sweep: target out of range");
    ++prevalence[t];
  }

  SweepResult result;
  result.classes.resize(C);
  std::vector<std::vector<std::uint8_t>> positives(C);
  struct Job {
    ClassIndex c;
    std::size_t slot;
  };
  std::vector<Job> jobs;
  for (ClassIndex c = 0; c < C; ++c) {
    if (prevalence[c] == 0) spdlog::warn("class '{}' has no target instances", class_names[c]);
    if (2 * prevalence[c] > targets.size()) {
      spdlog::warn("class '{}' is the majority class ({} of {})", class_names[c], prevalence[c], targets.size());
    }
    positives[c] = one_vs_rest_labels(targets, c);
    auto& cs = result.classes[c];
    cs.target = c;
    for (auto seed : config.seeds) {
      for (auto mc : min_cover_values(config.grid, prevalence[c])) {
        SweepCell cell;
        cell.target = c;
        cell.seed = seed;
        cell.min_cover = mc;
        cs.cells.push_back(std::move(cell));
      }
    }
    std::sort(cs.cells.begin(), cs.cells.end(), [](const SweepCell& a, const SweepCell& b) {
      return std::tie(a.seed, a.min_cover) < std::tie(b.seed, b.min_cover);
    });
    for (std::size_t i = 0; i < cs.cells.size(); ++i) jobs.push_back({c, i});
  }

  const auto run_job = [&](const Job& job) {
    auto& cell = result.classes[job.c].cells[job.slot];
    RipperConfig rc = config.base;
    rc.seed = cell.seed;
    rc.min_cover = cell.min_cover;
    cell.ruleset = induce_binary(data, positives[job.c], rc);
    cell.ruleset.target = job.c;
    cell.ruleset.target_name = class_names[job.c];
    cell.scores = class_fidelity(cell.ruleset, data, targets, job.c);
  };

  const std::size_t workers = std::clamp<std::size_t>(config.jobs, 1, std::max<std::size_t>(1, jobs.size()));
  if (workers == 1) {
    for (const auto& j : jobs) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
              run_job(jobs[i]);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  for (auto& cs : result.classes) {
    double best_f = -1.0;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < cs.cells.size(); ++i) {
      const auto& cell = cs.cells[i];
      const auto& incumbent = cs.cells[cs.best];
      const bool better = cell.scores.f > best_f ||
                          (cell.scores.f == best_f && std::tie(cell.min_cover, cell.seed) <
                                                          std::tie(incumbent.min_cover, incumbent.seed));
      if (better) {
        best_f = cell.scores.f;
        cs.best = i;
      }
      sum += cell.scores.f;
      sum_sq += cell.scores.f * cell.scores.f;
    }
    const auto n = static_cast<double>(cs.cells.size());
    const double mean = sum / n;
    cs.f_std = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
    for (std::size_t i = 0; i < cs.cells.size(); ++i) {
      if (cs.cells[i].scores.f >= best_f - config.well_performing_margin) cs.well_performing.push_back(i);
    }
  }

  result.best_fidelity.class_names.assign(class_names.begin(), class_names.end());
  for (const auto& cs : result.classes) result.best_fidelity.per_class.push_back(cs.cells[cs.best].scores);
  fill_macro(result.best_fidelity);
  return result;
}

namespace {

using RuleKey = std::vector<Condition>;

std::set<RuleKey> rule_keys(const RuleSet& rs) {
  std::set<RuleKey> keys;
  for (const auto& r : rs.rules) {
    RuleKey k = r.conditions;
    std::sort(k.begin(), k.end());
    keys.insert(std::move(k));
  }
  return keys;
}

}  // namespace

double rule_match(const RuleSet& best, std::span<const RuleSet> others) {
  if (others.empty()) return 100.0;
  if (best.rules.empty()) {
    const bool all_empty = std::all_of(others.begin(), others.end(), [](const RuleSet& o) { return o.rules.empty(); });
    spdlog::warn("rule match against an empty best rule-set for class '{}'", best.target_name);
    return all_empty ? 100.0 : 0.0;
  }
  const auto mine = rule_keys(best);
  double total = 0.0;
  for (const auto& o : others) {
    const auto theirs = rule_keys(o);
    std::size_t shared = 0;
    for (const auto& k : mine) shared += theirs.count(k);
    total += 100.0 * static_cast<double>(shared) / static_cast<double>(mine.size());
  }
  return total / static_cast<double>(others.size());
}

double classification_overlap(const RuleSet& best, std::span<const RuleSet> others, const InductionData& data) {
  if (data.rows() == 0) throw Error("classification overlap needs at least one instance");
  if (others.empty()) return 100.0;
  std::vector<bool> mine(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) mine[r] = apply_ruleset(best, data, r).positive;
  double total = 0.0;
  for (const auto& o : others) {
    std::size_t agree = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) agree += apply_ruleset(o, data, r).positive == mine[r] ? 1 : 0;
    total += 100.0 * static_cast<double>(agree) / static_cast<double>(data.rows());
  }
  return total / static_cast<double>(others.size());
}

ConsistencyReport consistency(const SweepResult& result, const InductionData& data,
                              std::span<const std::string> class_names) {
  ConsistencyReport report;
  for (const auto& cs : result.classes) {
    const auto& best = cs.cells.at(cs.best);
    std::vector<RuleSet> others;
    for (auto i : cs.well_performing) {
      if (i != cs.best) others.push_back(cs.cells[i].ruleset);
    }
    ClassConsistency cc;
    cc.target = cs.target;
    cc.name = cs.target < class_names.size() ? class_names[cs.target] : std::to_string(cs.target);
    cc.best_f = best.scores.f;
    cc.n_well_performing = cs.well_performing.size();
    cc.rule_match = rule_match(best.ruleset, others);
    cc.overlap = classification_overlap(best.ruleset, others, data);
    report.mean_rule_match += cc.rule_match;
    report.mean_overlap += cc.overlap;
    report.per_class.push_back(std::move(cc));
  }
  if (!report.per_class.empty()) {
    report.mean_rule_match /= static_cast<double>(report.per_class.size());
    report.mean_overlap /= static_cast<double>(report.per_class.size());
  }
  return report;
}

std::string fidelity_to_json(const FidelityReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    classes.push_back({{"class", c < report.class_names.size() ? report.class_names[c] : std::to_string(c)},
                       {"tp", s.tp},
                       {"fp", s.fp},
                       {"fn", s.fn},
                       {"precision", s.precision},
                       {"recall", s.recall},
                       {"f", s.f}});
  }
  j["classes"] = std::move(classes);
  j["macro"] = {{"precision", report.macro_precision}, {"recall", report.macro_recall}, {"f", report.macro_f}};
  return j.dump(2) + "\n";
}

std::string consistency_to_json(const ConsistencyReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class) {
    classes.push_back({{"class", c.name},
                       {"best_f", c.best_f},
                       {"well_performing", c.n_well_performing},
                       {"rule_match", c.rule_match},
                       {"classification_overlap", c.overlap}});
  }
  j["classes"] = std::move(classes);
  j["mean_rule_match"] = report.mean_rule_match;
  j["mean_classification_overlap"] = report.mean_overlap;
  return j.dump(2) + "\n";
}

FidelityReport fidelity_from_json(std::string_view text) {
  FidelityReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& c : j.at("classes")) {
      report.class_names.push_back(c.at("class").get<std::string>());
      BinaryScores s;
      s.tp = c.at("tp").get<std::size_t>();
      s.fp = c.at("fp").get<std::size_t>();
      s.fn = c.at("fn").get<std::size_t>();
      s.precision = c.at("precision").get<double>();
      s.recall = c.at("recall").get<double>();
      s.f = c.at("f").get<double>();
      report.per_class.push_back(s);
    }
    const auto& m = j.at("macro");
    report.macro_precision = m.at("precision").get<double>();
    report.macro_recall = m.at("recall").get<double>();
    report.macro_f = m.at("f").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed fidelity JSON: ") + e.what());
  }
  return report;
}

ConsistencyReport consistency_from_json(std::string_view text) {
  ConsistencyReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    ClassIndex index = 0;
    for (const auto& c : j.at("classes")) {
      ClassConsistency cc;
      cc.target = index++;
      cc.name = c.at("class").get<std::string>();
      cc.best_f = c.at("best_f").get<double>();
      cc.n_well_performing = c.at("well_performing").get<std::size_t>();
      cc.rule_match = c.at("rule_match").get<double>();
      cc.overlap = c.at("classification_overlap").get<double>();
      report.per_class.push_back(std::move(cc));
    }
    report.mean_rule_match = j.at("mean_rule_match").get<double>();
    report.mean_overlap = j.at("mean_classification_overlap").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed consistency JSON: ") + e.what());
  }
  return report;
}

std::string sweep_to_csv(const SweepResult& result, std::span<const std::string> class_names) {
  std::ostringstream out;
  out << "class,seed,min_cover,P,R,F\n";
  for (const auto& cs : result.classes) {
    const auto& name = cs.target < class_names.size() ? class_names[cs.target] : std::to_string(cs.target);
    for (const auto& cell : cs.cells) {
      out << name << ',' << cell.seed << ',' << cell.min_cover << ',' << format_double(cell.scores.precision) << ','
          << format_double(cell.scores.recall) << ',' << format_double(cell.scores.f) << '\n';
    }
  }
  return out.str();
}

}  // namespace gradrules
