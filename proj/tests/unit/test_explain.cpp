#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gradrules/explain.hpp"
#include "gradrules/rng.hpp"

using namespace gradrules;

namespace {

Condition eq(std::size_t f, double v) { return {f, ConditionOp::Equals, v}; }

RuleSet rules(std::vector<std::vector<Condition>> conds) {
  RuleSet rs;
  for (auto& c : conds) rs.rules.push_back(Rule{std::move(c), {}});
  return rs;
}

struct Problem {
  InductionData data;
  std::vector<ClassIndex> targets;
  std::vector<std::string> names{"a", "b", "c"};
};

Problem problem(std::size_t rows = 240) {
  Rng rng(6);
  std::vector<double> v(rows * 6);
  for (auto& x : v) x = static_cast<double>(rng.below(3)) - 1.0;
  std::vector<std::string> names{"u", "v", "w", "x", "y", "z"};
  Problem p{{rows, std::move(v), std::vector<FeatureKind>(6, FeatureKind::Discrete), names}, {}};
  p.targets.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const bool noise = rng.below(10) == 0;
    const ClassIndex clean = p.data.value(r, 0) == 1 ? 0 : p.data.value(r, 1) == 1 ? 1 : 2;
    p.targets[r] = noise ? rng.below(3) : clean;
  }
  return p;
}

}  // namespace

TEST_CASE("binary scores") {
  const auto s = binary_scores(8, 2, 2);
  CHECK(s.precision == doctest::Approx(0.8));
  CHECK(s.recall == doctest::Approx(0.8));
  CHECK(s.f == doctest::Approx(0.8));
  const auto none = binary_scores(0, 0, 5);
  CHECK(none.precision == 0.0);
  CHECK(none.f == 0.0);
  const auto uneven = binary_scores(3, 1, 5);
  CHECK(uneven.f == doctest::Approx(2 * 0.75 * 0.375 / (0.75 + 0.375)));
}

TEST_CASE("fidelity of memorizing rule-sets is 1") {
  const InductionData d(4, {1, -1, 0, 1}, {FeatureKind::Discrete}, {"t"});
  const std::vector<ClassIndex> targets{0, 1, 2, 0};
  const std::vector<std::string> names{"p", "q", "r"};
  std::vector<RuleSet> sets{rules({{eq(0, 1)}}), rules({{eq(0, -1)}}), rules({{eq(0, 0)}})};
  for (ClassIndex c = 0; c < 3; ++c) sets[c].target = c;
  const auto report = fidelity(sets, d, targets, names);
  CHECK(report.macro_f == 1.0);
  CHECK(report.macro_precision == 1.0);
  CHECK(report.class_names == names);
  CHECK(class_fidelity(sets[0], d, targets, 0).tp == 2);
}

TEST_CASE("label agreement") {
  const std::vector<ClassIndex> pred{0, 0, 1, 1}, truth{0, 1, 1, 1};
  const std::vector<std::string> names{"x", "y"};
  const auto r = label_agreement(pred, truth, names);
  CHECK(r.per_class[0].precision == doctest::Approx(0.5));
  CHECK(r.per_class[1].recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.macro_f == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
}

TEST_CASE("min cover grids") {
  using K = MinCoverGrid::Kind;
  CHECK(min_cover_values({K::Ladder, {}}, 1000) == std::vector<std::size_t>{2, 4, 8, 16, 32, 64, 128});
  CHECK(min_cover_values({K::Ladder, {}}, 20) == std::vector<std::size_t>{2, 4, 8, 16});
  CHECK(min_cover_values({K::Full, {}}, 5) == std::vector<std::size_t>{2, 3, 4, 5});
  CHECK(min_cover_values({K::Full, {}}, 1) == std::vector<std::size_t>{1});
  CHECK(min_cover_values({K::Explicit, {9, 3, 3}}, 2) == std::vector<std::size_t>{3, 9});
  CHECK_THROWS_AS(min_cover_values({K::Explicit, {0}}, 5), ConfigError);
  CHECK(seed_range(5, 3) == std::vector<std::uint64_t>{5, 6, 7});
}

TEST_CASE("a 1x1 sweep equals a single induction") {
  const auto p = problem();
  SweepConfig c;
  c.seeds = {3};
  c.grid = {MinCoverGrid::Kind::Explicit, {4}};
  const auto result = sweep(p.data, p.targets, p.names, c);
  RipperConfig rc;
  rc.seed = 3;
  rc.min_cover = 4;
  const auto single = induce_one_vs_rest(p.data, p.targets, p.names, rc);
  std::vector<RuleSet> sets;
  for (const auto& [k, rs] : single) sets.push_back(rs);
  CHECK(result.best_rulesets() == sets);
  CHECK(result.best_fidelity == fidelity(sets, p.data, p.targets, p.names));
  for (const auto& cs : result.classes) {
    CHECK(cs.cells.size() == 1);
    CHECK(cs.f_std == 0.0);
    CHECK(cs.well_performing == std::vector<std::size_t>{0});
  }
}

TEST_CASE("sweep bookkeeping") {
  const auto p = problem();
  SweepConfig c;
  c.seeds = seed_range(1, 4);
  c.grid = {MinCoverGrid::Kind::Explicit, {1, 3, 9}};
  const auto result = sweep(p.data, p.targets, p.names, c);
  REQUIRE(result.classes.size() == 3);
  for (const auto& cs : result.classes) {
    REQUIRE(cs.cells.size() == 12);
    for (std::size_t i = 1; i < cs.cells.size(); ++i) {
      const auto& a = cs.cells[i - 1];
      const auto& b = cs.cells[i];
      CHECK((a.seed < b.seed || (a.seed == b.seed && a.min_cover < b.min_cover)));
    }
    const auto& best = cs.cells[cs.best];
    double mean = 0.0;
    for (const auto& cell : cs.cells) {
      CHECK(cell.scores.f <= best.scores.f);
      if (cell.scores.f == best.scores.f) {
        CHECK((cell.min_cover > best.min_cover || (cell.min_cover == best.min_cover && cell.seed >= best.seed)));
      }
      CHECK(cell.ruleset.config.seed == cell.seed);
      CHECK(cell.ruleset.config.min_cover == cell.min_cover);
      CHECK(cell.scores == class_fidelity(cell.ruleset, p.data, p.targets, cs.target));
      mean += cell.scores.f;
    }
    mean /= 12.0;
    double var = 0.0;
    for (const auto& cell : cs.cells) var += (cell.scores.f - mean) * (cell.scores.f - mean);
    CHECK(cs.f_std == doctest::Approx(std::sqrt(var / 12.0)).epsilon(1e-12));
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < 12; ++i) {
      if (cs.cells[i].scores.f >= best.scores.f - 0.01) expected.push_back(i);
    }
    CHECK(cs.well_performing == expected);
  }

  SUBCASE("parallel cells give identical results") {
    auto parallel = c;
    parallel.jobs = 3;
    const auto again = sweep(p.data, p.targets, p.names, parallel);
    CHECK(sweep_to_csv(again, p.names) == sweep_to_csv(result, p.names));
    CHECK(again.best_rulesets() == result.best_rulesets());
  }
  SUBCASE("csv layout") {
    const auto csv = sweep_to_csv(result, p.names);
    CHECK(csv.rfind("class,seed,min_cover,P,R,F\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 36);
  }
}

TEST_CASE("rule match") {
  const auto a = rules({{eq(0, 1), eq(2, -1)}, {eq(1, 1)}});
  const auto reordered = rules({{eq(1, 1)}, {eq(2, -1), eq(0, 1)}});
  const auto disjoint = rules({{eq(3, 1)}});
  const auto half = rules({{eq(1, 1)}, {eq(4, 0)}});
  std::vector<RuleSet> others{reordered};
  CHECK(rule_match(a, others) == 100.0);
  others = {disjoint};
  CHECK(rule_match(a, others) == 0.0);
  others = {reordered, half};
  CHECK(rule_match(a, others) == doctest::Approx(75.0));
  CHECK(rule_match(a, {}) == 100.0);
  others = {RuleSet{}};
  CHECK(rule_match(RuleSet{}, others) == 100.0);
  others = {a};
  CHECK(rule_match(RuleSet{}, others) == 0.0);
}

TEST_CASE("classification overlap") {
  const InductionData d(4, {1, 1, 0, 0}, {FeatureKind::Discrete}, {"t"});
  const auto best = rules({{eq(0, 1)}});
  const auto complement = rules({{eq(0, 0)}});
  std::vector<RuleSet> others{best};
  CHECK(classification_overlap(best, others, d) == 100.0);
  others = {complement};
  CHECK(classification_overlap(best, others, d) == 0.0);
  others = {best, complement};
  CHECK(classification_overlap(best, others, d) == 50.0);
  CHECK(classification_overlap(best, {}, d) == 100.0);
  const InductionData empty(0, {}, {FeatureKind::Discrete}, {"t"});
  CHECK_THROWS_AS(classification_overlap(best, others, empty), Error);
}

TEST_CASE("consistency compares well-performing cells with the best") {
  const InductionData d(4, {1, 1, 0, -1}, {FeatureKind::Discrete}, {"t"});
  SweepResult result;
  ClassSweep cs;
  cs.cells.resize(3);
  cs.cells[0].ruleset = rules({{eq(0, 1)}});
  cs.cells[0].scores.f = 0.9;
  cs.cells[1].ruleset = rules({{eq(0, 0)}});
  cs.cells[1].scores.f = 0.5;
  cs.cells[2].ruleset = rules({{eq(0, 1)}, {eq(0, -1)}});
  cs.cells[2].scores.f = 0.895;
  cs.best = 0;
  cs.well_performing = {0, 2};
  result.classes.push_back(cs);
  const std::vector<std::string> names{"only"};
  const auto report = consistency(result, d, names);
  REQUIRE(report.per_class.size() == 1);
  CHECK(report.per_class[0].name == "only");
  CHECK(report.per_class[0].n_well_performing == 2);
  CHECK(report.per_class[0].rule_match == 100.0);
  CHECK(report.per_class[0].overlap == 75.0);
  CHECK(report.mean_overlap == 75.0);
}

TEST_CASE("report json round-trip") {
  FidelityReport f;
  f.class_names = {"a", "b"};
  f.per_class = {binary_scores(8, 2, 2), binary_scores(1, 0, 3)};
  f.macro_precision = (0.8 + 1.0) / 2;
  f.macro_recall = (0.8 + 0.25) / 2;
  f.macro_f = (0.8 + 0.4) / 2;
  CHECK(fidelity_from_json(fidelity_to_json(f)) == f);

  ConsistencyReport c;
  c.per_class = {{0, "a", 0.9, 4, 75.0, 97.5}, {1, "b", 0.5, 1, 100.0, 100.0}};
  c.mean_rule_match = 87.5;
  c.mean_overlap = 98.75;
  const auto back = consistency_from_json(consistency_to_json(c));
  REQUIRE(back.per_class.size() == 2);
  CHECK(back.per_class[0].name == "a");
  CHECK(back.per_class[0].overlap == 97.5);
  CHECK(back.per_class[1].n_well_performing == 1);
  CHECK(back.mean_overlap == 98.75);
  CHECK_THROWS_AS(fidelity_from_json("[]"), IoError);
}
