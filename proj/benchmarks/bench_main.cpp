#include <benchmark/benchmark.h>

#include <algorithm>
#include <string>
#include <vector>

#include "gradrules/corpus.hpp"
#include "gradrules/net.hpp"
#include "gradrules/ripper.hpp"
#include "gradrules/rng.hpp"
#include "gradrules/select.hpp"

using namespace gradrules;

namespace {

// Roughly the shape of a TF-IDF row: ~80 nonzeros out of 30k terms.
SparseRow random_row(Rng& rng, std::size_t n_features, std::size_t nnz) {
  SparseRow row;
  for (std::size_t i = 0; i < nnz; ++i) row.push_back({static_cast<FeatureIndex>(rng.below(n_features)), rng.uniform()});
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  row.erase(std::unique(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.index == b.index; }),
            row.end());
  return row;
}

void BM_InputGradient(benchmark::State& state) {
  NetworkConfig c;
  c.layer_sizes = {static_cast<std::size_t>(state.range(0)), 100, 100, 4};
  const auto net = TrainedNetwork::initialize(c);
  Rng rng(1);
  const auto row = random_row(rng, c.layer_sizes[0], 80);
  for (auto _ : state) benchmark::DoNotOptimize(net.input_gradient(row, 0));
}
BENCHMARK(BM_InputGradient)->Arg(1000)->Arg(30000);

void BM_MutualInformationScores(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  SignMatrix s;
  s.n_features = 30000;
  std::vector<ClassIndex> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<SignEntry> entries;
    for (const auto& e : random_row(rng, s.n_features, 80)) {
      entries.push_back({e.index, static_cast<std::int8_t>(rng.below(2) ? 1 : -1)});
    }
    s.rows.push_back(std::move(entries));
    labels[r] = static_cast<ClassIndex>(rng.below(4));
  }
  s.labels = labels;
  for (auto _ : state) benchmark::DoNotOptimize(mutual_information_scores(s, labels, 4));
}
BENCHMARK(BM_MutualInformationScores)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_InduceBinary(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t features = 100;
  Rng rng(3);
  std::vector<double> v(rows * features);
  for (auto& x : v) x = rng.below(10) == 0 ? (rng.below(2) ? 1.0 : -1.0) : 0.0;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < features; ++f) names.push_back("t" + std::to_string(f));
  const InductionData d(rows, std::move(v), std::vector<FeatureKind>(features, FeatureKind::Discrete), names);
  std::vector<std::uint8_t> y(rows);
  for (std::size_t r = 0; r < rows; ++r) y[r] = d.value(r, 0) == 1 || (d.value(r, 1) == -1 && d.value(r, 2) == 0);
  RipperConfig c;
  c.min_cover = 4;
  for (auto _ : state) benchmark::DoNotOptimize(induce_binary(d, y, c));
}
BENCHMARK(BM_InduceBinary)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State& state) {
  Rng rng(4);
  std::string text;
  const char* words[] = {"circuit", "the", "voltage", "orbit", "NASA's", "e-mail", "x86", "and", "patients", "key"};
  for (int i = 0; i < 2000; ++i) text += std::string(words[rng.below(10)]) + (rng.below(8) ? " " : ".\n");
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize);

}  // namespace

BENCHMARK_MAIN();
