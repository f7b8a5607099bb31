#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gradrules/select.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace gradrules;

TEST_CASE("sensitivity is the max over outputs of the RMS gradient") {
  // One input feature, identity hidden layer, two outputs with logits
  // (w x, 0): d p0 / dx = w p0 p1 and d p1 / dx = -w p0 p1.
  NetworkConfig c;
  c.layer_sizes = {1, 1, 2};
  const TrainedNetwork net(c, {{1, 1, {1.0}, {0.0}}, {1, 2, {2.0, 0.0}, {0.0, 0.0}}});
  FeatureMatrix m;
  m.n_features = 1;
  m.rows = {{{0, 0.3}}, {{0, 1.1}}};
  double sq = 0.0;
  for (const auto& row : m.rows) {
    const double g = net.input_gradient(row, 0)[0];
    sq += g * g;
  }
  const auto s = sensitivity_scores(net, m);
  CHECK(s.method == SelectorKind::SensitivityAnalysis);
  REQUIRE(s.scores.size() == 1);
  CHECK(s.scores[0] == doctest::Approx(std::sqrt(sq / 2.0)).epsilon(1e-12));
}

TEST_CASE("sensitivity edge cases") {
  NetworkConfig c;
  c.layer_sizes = {3, 4, 2};
  const auto zero = TrainedNetwork::zeros(c);
  FeatureMatrix m;
  m.n_features = 3;
  m.rows = {{{0, 1.0}}, {{2, 0.5}}};
  for (double v : sensitivity_scores(zero, m).scores) CHECK(v == 0.0);
  FeatureMatrix empty;
  empty.n_features = 3;
  CHECK_THROWS_AS(sensitivity_scores(zero, empty), Error);
}

TEST_CASE("mutual information examples") {
  const std::vector<std::uint64_t> independent{5, 5, 5, 5};
  CHECK(mutual_information(independent, 2, 2) == 0.0);
  const std::vector<std::uint64_t> identical{7, 0, 0, 7};
  CHECK(mutual_information(identical, 2, 2) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
  const std::vector<std::uint64_t> empty(6, 0);
  CHECK(mutual_information(empty, 2, 3) == 0.0);
  CHECK_THROWS_AS(mutual_information(identical, 3, 2), Error);
}

TEST_CASE("mutual information matches the double-sum reference") {
  const std::vector<std::uint64_t> t{3, 0, 1, 9, 2, 2, 0, 4, 5, 1, 1, 7};
  CHECK(std::abs(mutual_information(t, 3, 4) - gradrules::testing::mi_reference(t, 3, 4)) < 1e-14);
}

TEST_CASE("mutual information scores over sign values") {
  SignMatrix s;
  s.n_features = 3;
  // feature 0 mirrors the label, feature 1 is constant, feature 2 is -1 in half of each class
  s.rows = {{{0, 1}, {2, -1}}, {{0, 1}}, {{2, -1}}, {}};
  s.labels = {1, 1, 0, 0};
  const std::vector<ClassIndex> labels{1, 1, 0, 0};
  const auto mi = mutual_information_scores(s, labels, 2);
  CHECK(mi.method == SelectorKind::MutualInformation);
  CHECK(mi.scores[0] == doctest::Approx(std::numbers::ln2));
  CHECK(mi.scores[1] == 0.0);
  CHECK(mi.scores[2] == doctest::Approx(0.0));

  const std::vector<ClassIndex> constant{0, 0, 0, 0};
  for (double v : mutual_information_scores(s, constant, 2).scores) CHECK(v == doctest::Approx(0.0));
  const std::vector<ClassIndex> short_labels{0};
  CHECK_THROWS_AS(mutual_information_scores(s, short_labels, 2), Error);
}

TEST_CASE("select_top_k") {
  FeatureScores s;
  s.scores = {0.1, 0.9, 0.5};
  CHECK(select_top_k(s, 2).indices == std::vector<FeatureIndex>{1, 2});
  s.scores = {0.5, 0.5};
  CHECK(select_top_k(s, 1).indices == std::vector<FeatureIndex>{0});
  s.scores = {0.2, 0.7, 0.7, 0.1};
  CHECK(select_top_k(s, 3).indices == std::vector<FeatureIndex>{1, 2, 0});
  const auto all = select_top_k(s, 10);
  CHECK(all.indices.size() == 4);
  CHECK_THROWS_AS(select_top_k(s, 0), ConfigError);

  FeatureScores big;
  big.scores.resize(30346);
  for (std::size_t i = 0; i < big.scores.size(); ++i) big.scores[i] = static_cast<double>((i * 7919) % 1000);
  const auto top = select_top_k(big, 1000);
  CHECK(top.indices.size() == 1000);
  CHECK(select_top_k(big, 1000).indices == top.indices);
}

TEST_CASE("selection file round-trip") {
  gradrules::testing::TempDir dir;
  FeatureScores s;
  s.scores = {0.1, 0.9, 0.5};
  const auto sel = select_top_k(s, 2);
  const Vocabulary v({"a1", "b2", "c3"}, {1, 1, 1}, 1);
  save_selection(dir / "selection.tsv", sel, s, v);
  const auto back = load_selection(dir / "selection.tsv");
  CHECK(back.indices == sel.indices);
  CHECK(back.terms == std::vector<std::string>{"b2", "c3"});
  CHECK(back.scores == std::vector<double>{0.9, 0.5});
  CHECK_THROWS_AS(load_selection(dir / "missing.tsv"), IoError);
}
