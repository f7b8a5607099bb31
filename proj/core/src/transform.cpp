#include "gradrules/transform.hpp"

#include <cmath>

namespace gradrules {

SaliencyMap::SaliencyMap(const TrainedNetwork& net, const FeatureMatrix& inputs, SaliencyTarget mode)
    : net_(&net), inputs_(&inputs), mode_(mode) {
  if (inputs.n_features != net.n_inputs()) throw Error("saliency: input width does not match network");
  targets_.reserve(inputs.size());
  if (mode == SaliencyTarget::GoldClass) {
    if (!inputs.has_labels()) throw Error("saliency: gold-class mode requires labels");
    for (auto y : inputs.labels) {
      if (y >= net.n_outputs()) throw Error("saliency: label exceeds network outputs");
      targets_.push_back(y);
    }
  } else {
    for (const auto& r : inputs.rows) targets_.push_back(net.predict(r).predicted);
  }
}

std::vector<double> SaliencyMap::row(std::size_t j) const {
  return net_->input_gradient(inputs_->rows.at(j), targets_.at(j));
}

void SaliencyMap::gather(std::size_t j, std::span<const FeatureIndex> features, std::span<double> out) const {
  net_->input_gradient_at(inputs_->rows.at(j), targets_.at(j), features, out);
}

SaliencyMap saliency_map(const TrainedNetwork& net, const FeatureMatrix& inputs, SaliencyTarget mode) {
  return SaliencyMap(net, inputs, mode);
}

std::size_t count_zero_gradients(const SaliencyMap& map) {
  std::size_t zeros = 0;
  for (std::size_t j = 0; j < map.rows(); ++j) {
    for (double g : map.row(j)) zeros += g == 0.0 ? 1 : 0;
  }
  return zeros;
}

ReweighedMatrix reweigh(const FeatureMatrix& inputs, const SaliencyMap& saliency) {
  if (inputs.size() != saliency.rows() || inputs.n_features != saliency.cols()) {
    throw Error("reweigh: shape mismatch between inputs and saliency map");
  }
  ReweighedMatrix out;
  out.n_features = inputs.n_features;
  out.labels = inputs.labels;
  out.rows.reserve(inputs.size());
  std::vector<FeatureIndex> idx;
  std::vector<double> grad;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const auto& row = inputs.rows[j];
    idx.resize(row.size());
    grad.resize(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) idx[i] = row[i].index;
    saliency.gather(j, idx, grad);
    SparseRow r;
    r.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].value == 0.0) continue;
      if (grad[i] == 0.0) ++out.zero_gradient_entries;
      r.push_back({row[i].index, row[i].value * grad[i]});
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<double> reweigh_dense(std::span<const double> inputs, std::span<const double> gradients) {
  if (inputs.size() != gradients.size()) throw Error("reweigh: shape mismatch between inputs and gradients");
  std::vector<double> out(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = inputs[i] == 0.0 ? 0.0 : inputs[i] * gradients[i];
  return out;
}

std::int8_t sign_of(double value, double zero_threshold) {
  if (std::isnan(value)) throw Error("sign reduction of NaN");
  if (std::fabs(value) <= zero_threshold) return 0;
  return value > 0.0 ? 1 : -1;
}

SignMatrix sign_reduce(const ReweighedMatrix& reweighed, double zero_threshold) {
  SignMatrix out;
  out.n_features = reweighed.n_features;
  out.labels = reweighed.labels;
  out.rows.reserve(reweighed.rows.size());
  for (const auto& row : reweighed.rows) {
    std::vector<SignEntry> r;
    r.reserve(row.size());
    for (const auto& e : row) {
      const auto s = sign_of(e.value, zero_threshold);
      if (s != 0) r.push_back({e.index, s});
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

SignMatrix presence_signs(const FeatureMatrix& inputs) {
  ReweighedMatrix rw;
  rw.rows = inputs.rows;
  rw.n_features = inputs.n_features;
  rw.labels = inputs.labels;
  return sign_reduce(rw, 0.0);
}

void save_sign_matrix(const std::filesystem::path& path, const SignMatrix& signs,
                      std::span<const std::string> classes, const Vocabulary& vocabulary) {
  SparseText text;
  text.classes.assign(classes.begin(), classes.end());
  text.vocabulary = vocabulary;
  text.matrix.n_features = signs.n_features;
  text.matrix.labels = signs.labels;
  text.matrix.rows.reserve(signs.rows.size());
  for (const auto& row : signs.rows) {
    SparseRow r;
    r.reserve(row.size());
    for (const auto& e : row) r.push_back({e.index, static_cast<double>(e.sign)});
    text.matrix.rows.push_back(std::move(r));
  }
  save_sparse_text(path, kSignMatrixMagic, text);
}

SignMatrix to_sign_matrix(const FeatureMatrix& m) {
  SignMatrix out;
  out.n_features = m.n_features;
  out.labels = m.labels;
  out.rows.reserve(m.size());
  for (const auto& row : m.rows) {
    std::vector<SignEntry> r;
    r.reserve(row.size());
    for (const auto& e : row) {
      if (e.value != 1.0 && e.value != -1.0) throw IoError("sign matrix values must be -1 or 1");
      r.push_back({e.index, static_cast<std::int8_t>(e.value)});
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

SparseText load_sign_matrix_text(const std::filesystem::path& path) {
  auto text = load_sparse_text(path, kSignMatrixMagic);
  to_sign_matrix(text.matrix);  // validates the value alphabet
  return text;
}

}  // namespace gradrules
