#include "gradrules/select.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gradrules/sparse_text.hpp"

namespace gradrules {

FeatureScores sensitivity_scores(const TrainedNetwork& net, const FeatureMatrix& inputs) {
  if (inputs.size() == 0) throw Error("sensitivity analysis needs at least one instance");
  const std::size_t K = net.n_inputs();
  const std::size_t C = net.n_outputs();
  if (inputs.n_features != K) throw Error("sensitivity analysis: input width does not match network");

  std::vector<double> sum_sq(K * C, 0.0);
  std::vector<double> grad(K * C);
  for (const auto& row : inputs.rows) {
    net.input_gradient_all(row, grad);
    for (std::size_t i = 0; i < grad.size(); ++i) sum_sq[i] += grad[i] * grad[i];
  }
  const double inv_j = 1.0 / static_cast<double>(inputs.size());
  FeatureScores out;
  out.method = SelectorKind::SensitivityAnalysis;
  out.scores.assign(K, 0.0);
  for (std::size_t n = 0; n < C; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      out.scores[k] = std::max(out.scores[k], std::sqrt(sum_sq[n * K + k] * inv_j));
    }
  }
  return out;
}

namespace {

// x ln x for integer counts, tabulated for the small values that dominate.
double xlogx(std::uint64_t x) {
  static const auto table = [] {
    std::array<double, 4096> t{};
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = static_cast<double>(i) * std::log(static_cast<double>(i));
    return t;
  }();
  if (x < table.size()) return table[x];
  const double d = static_cast<double>(x);
  return d * std::log(d);
}

}  // namespace

double mutual_information(std::span<const std::uint64_t> joint_counts, std::size_t n_x, std::size_t n_y) {
  if (joint_counts.size() != n_x * n_y) throw Error("mutual information: table size mismatch");
  // I(X;Y) = (sum c ln c - sum r ln r - sum s ln s + n ln n) / n
  std::vector<std::uint64_t> rows(n_x, 0), cols(n_y, 0);
  std::uint64_t n = 0;
  double acc = 0.0;
  for (std::size_t x = 0; x < n_x; ++x) {
    for (std::size_t y = 0; y < n_y; ++y) {
      const auto c = joint_counts[x * n_y + y];
      rows[x] += c;
      cols[y] += c;
      n += c;
      acc += xlogx(c);
    }
  }
  if (n == 0) return 0.0;
  for (auto r : rows) acc -= xlogx(r);
  for (auto s : cols) acc -= xlogx(s);
  acc += xlogx(n);
  return std::max(0.0, acc / static_cast<double>(n));
}

FeatureScores mutual_information_scores(const SignMatrix& signs, std::span<const ClassIndex> labels,
                                        std::size_t n_classes) {
  if (labels.size() != signs.size()) throw Error("mutual information: one label per instance required");
  if (n_classes == 0) throw Error("mutual information: no classes");
  const std::size_t K = signs.n_features;
  std::vector<std::uint64_t> class_totals(n_classes, 0);
  // counts[k][sign][class] for sign -1 and +1; zeros derived from totals
  std::vector<std::uint64_t> neg(K * n_classes, 0), pos(K * n_classes, 0);
  for (std::size_t j = 0; j < signs.size(); ++j) {
    const auto y = labels[j];
    if (y >= n_classes) throw Error("mutual information: label out of range");
    ++class_totals[y];
    for (const auto& e : signs.rows[j]) {
      if (e.index >= K) throw Error("mutual information: feature index out of range");
      auto& bucket = e.sign > 0 ? pos : neg;
      ++bucket[static_cast<std::size_t>(e.index) * n_classes + y];
    }
  }
  FeatureScores out;
  out.method = SelectorKind::MutualInformation;
  out.scores.assign(K, 0.0);
  std::vector<std::uint64_t> table(3 * n_classes);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t y = 0; y < n_classes; ++y) {
      const auto nn = neg[k * n_classes + y];
      const auto pp = pos[k * n_classes + y];
      table[0 * n_classes + y] = nn;
      table[1 * n_classes + y] = class_totals[y] - nn - pp;
      table[2 * n_classes + y] = pp;
    }
    out.scores[k] = mutual_information(table, 3, n_classes);
  }
  return out;
}

SelectionResult select_top_k(const FeatureScores& scores, std::size_t k) {
  if (k == 0) throw ConfigError("k must be >= 1");
  const auto& s = scores.scores;
  for (double v : s) {
    if (!std::isfinite(v) || v < 0.0) throw Error("feature scores must be finite and non-negative");
  }
  if (k > s.size()) {
    spdlog::warn("requested top {} features but only {} exist; selecting all", k, s.size());
    k = s.size();
  }
  std::vector<FeatureIndex> order(s.size());
  std::iota(order.begin(), order.end(), FeatureIndex{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](FeatureIndex a, FeatureIndex b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
  order.resize(k);
  return {std::move(order), k};
}

void save_selection(const std::filesystem::path& path, const SelectionResult& selection,
                    const FeatureScores& scores, const Vocabulary& vocabulary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto idx : selection.indices) {
    out << idx << '\t' << vocabulary.term(idx) << '\t' << format_double(scores.scores.at(idx)) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SelectionFile load_selection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  SelectionFile sel;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw IoError("malformed selection line: " + line);
    try {
      sel.indices.push_back(static_cast<FeatureIndex>(std::stoul(line.substr(0, t1))));
    } catch (const std::logic_error&) {
      throw IoError("malformed selection index: " + line);
    }
    sel.terms.push_back(line.substr(t1 + 1, t2 - t1 - 1));
    sel.scores.push_back(parse_double(std::string_view(line).substr(t2 + 1)));
  }
  return sel;
}

}  // namespace gradrules
