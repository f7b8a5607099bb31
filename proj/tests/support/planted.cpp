#include "planted.hpp"

#include <numeric>
#include <string>

#include "gradrules/rng.hpp"

namespace gradrules::testing {

bool PlantedDnf::operator()(const InductionData& data, std::size_t row) const {
  for (const auto& term : terms) {
    bool all = true;
    for (const auto& [f, v] : term) all = all && data.value(row, f) == static_cast<double>(v);
    if (all) return true;
  }
  return false;
}

namespace {

InductionData uniform_instances(Rng& rng, std::size_t rows, std::size_t features) {
  std::vector<double> values(rows * features);
  for (auto& v : values) v = static_cast<double>(rng.below(3)) - 1.0;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < features; ++f) names.push_back("f" + std::to_string(f));
  return {rows, std::move(values), std::vector<FeatureKind>(features, FeatureKind::Discrete), std::move(names)};
}

PlantedDnf random_dnf(Rng& rng, const PlantedOptions& o) {
  PlantedDnf dnf;
  const std::size_t n_terms = 1 + rng.below(o.max_terms);
  for (std::size_t t = 0; t < n_terms; ++t) {
    std::vector<std::size_t> features(o.n_features);
    std::iota(features.begin(), features.end(), std::size_t{0});
    rng.shuffle(features);
    const std::size_t n_lit = o.min_literals + rng.below(o.max_literals - o.min_literals + 1);
    std::vector<std::pair<std::size_t, int>> term;
    for (std::size_t i = 0; i < n_lit; ++i) term.emplace_back(features[i], static_cast<int>(rng.below(3)) - 1);
    dnf.terms.push_back(std::move(term));
  }
  return dnf;
}

std::vector<std::uint8_t> label_all(const PlantedDnf& dnf, const InductionData& data) {
  std::vector<std::uint8_t> out(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) out[r] = dnf(data, r) ? 1 : 0;
  return out;
}

}  // namespace

PlantedDataset make_planted(std::uint64_t seed, const PlantedOptions& o) {
  Rng rng(seed);
  PlantedDataset ds;
  for (;;) {
    ds.dnf = random_dnf(rng, o);
    ds.train = uniform_instances(rng, o.n_rows, o.n_features);
    ds.train_clean = label_all(ds.dnf, ds.train);
    const auto pos = std::accumulate(ds.train_clean.begin(), ds.train_clean.end(), std::size_t{0});
    const double rate = static_cast<double>(pos) / static_cast<double>(o.n_rows);
    if (rate >= o.min_positive_rate && rate <= o.max_positive_rate) break;
  }
  ds.train_labels = ds.train_clean;
  for (auto& y : ds.train_labels) {
    if (rng.uniform() < o.noise) y ^= 1;
  }
  ds.holdout = uniform_instances(rng, o.n_holdout, o.n_features);
  ds.holdout_labels = label_all(ds.dnf, ds.holdout);
  return ds;
}

double ruleset_f(const RuleSet& ruleset, const InductionData& data, std::span<const std::uint8_t> labels) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const bool predicted = apply_ruleset(ruleset, data, r).positive;
    if (predicted && labels[r]) ++tp;
    else if (predicted) ++fp;
    else if (labels[r]) ++fn;
  }
  if (tp == 0) return fp + fn == 0 ? 1.0 : 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace gradrules::testing
