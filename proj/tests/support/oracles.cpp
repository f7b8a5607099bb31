#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace gradrules::testing {

ReferencePass reference_forward(const TrainedNetwork& net, std::span<const double> input) {
  ReferencePass pass;
  std::vector<double> x(input.begin(), input.end());
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    std::vector<double> z(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double s = layer.bias[o];
      for (std::size_t i = 0; i < layer.in; ++i) s += x[i] * layer.weights[i * layer.out + o];
      z[o] = s;
    }
    if (l + 1 < layers.size()) {
      for (auto& v : z) {
        pass.active.push_back(v > 0.0);
        v = v > 0.0 ? v : 0.0;
      }
    }
    x = std::move(z);
  }
  const double m = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (auto& v : x) total += (v = std::exp(v - m));
  for (auto& v : x) v /= total;
  pass.probabilities = std::move(x);
  return pass;
}

std::vector<double> finite_difference_gradient(const TrainedNetwork& net, std::span<const double> input,
                                               ClassIndex output, double h) {
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = x[k];
    x[k] = saved + h;
    const double up = reference_forward(net, x).probabilities[output];
    x[k] = saved - h;
    const double down = reference_forward(net, x).probabilities[output];
    x[k] = saved;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

double mi_reference(std::span<const std::uint64_t> counts, std::size_t n_x, std::size_t n_y) {
  double n = 0.0;
  std::vector<double> px(n_x, 0.0), py(n_y, 0.0);
  for (std::size_t x = 0; x < n_x; ++x) {
    for (std::size_t y = 0; y < n_y; ++y) {
      const auto c = static_cast<double>(counts[x * n_y + y]);
      px[x] += c;
      py[y] += c;
      n += c;
    }
  }
  if (n == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t x = 0; x < n_x; ++x) {
    for (std::size_t y = 0; y < n_y; ++y) {
      const auto c = static_cast<double>(counts[x * n_y + y]);
      if (c == 0.0) continue;
      const double pxy = c / n;
      mi += pxy * std::log(pxy / ((px[x] / n) * (py[y] / n)));
    }
  }
  return mi;
}

long double foil_gain_reference(long double p1, long double n1, long double p0, long double n0) {
  return p1 * (std::log2(p1 / (p1 + n1)) - std::log2(p0 / (p0 + n0)));
}

Rule prune_bruteforce(const Rule& rule, const InductionData& data, std::span<const std::uint8_t> positive,
                      std::span<const std::size_t> rows) {
  Rule best;
  double best_value = 0.0;
  for (std::size_t len = 1; len <= rule.conditions.size(); ++len) {
    Rule candidate;
    candidate.conditions.assign(rule.conditions.begin(), rule.conditions.begin() + static_cast<long>(len));
    double p = 0.0, n = 0.0;
    for (auto r : rows) {
      if (!candidate.covers(data, r)) continue;
      (positive[r] ? p : n) += 1.0;
    }
    const double value = p + n == 0.0 ? 0.0 : (p - n) / (p + n);
    if (len == 1 || value > best_value) {
      best = candidate;
      best_value = value;
    }
  }
  return best;
}

}  // namespace gradrules::testing
