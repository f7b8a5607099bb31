#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gradrules/net.hpp"
#include "gradrules/sparse.hpp"
#include "gradrules/sparse_text.hpp"

namespace gradrules {

/// Which output node's gradient defines an instance's saliency row.
enum class SaliencyTarget { PredictedClass, GoldClass };

/// Lazily evaluated J x K gradient matrix. Rows are computed on demand so
/// the full matrix never has to be resident; the network and input matrix
/// must outlive the map.
class SaliencyMap {
 public:
  SaliencyMap(const TrainedNetwork& net, const FeatureMatrix& inputs, SaliencyTarget mode);

  std::size_t rows() const { return targets_.size(); }
  std::size_t cols() const { return net_->n_inputs(); }
  SaliencyTarget mode() const { return mode_; }
  ClassIndex target(std::size_t row) const { return targets_.at(row); }
  const FeatureMatrix& inputs() const { return *inputs_; }

  std::vector<double> row(std::size_t j) const;
  /// Gradient of row j at the given features only.
  void gather(std::size_t j, std::span<const FeatureIndex> features, std::span<double> out) const;

 private:
  const TrainedNetwork* net_;
  const FeatureMatrix* inputs_;
  SaliencyTarget mode_;
  std::vector<ClassIndex> targets_;
};

/// Throws Error when GoldClass is requested on an unlabeled matrix.
SaliencyMap saliency_map(const TrainedNetwork& net, const FeatureMatrix& inputs, SaliencyTarget mode);

/// Number of exactly-zero entries over the full J x K map.
std::size_t count_zero_gradients(const SaliencyMap& map);

/// Gradient-times-input matrix. Entries exist only where the input is
/// nonzero; a stored value may still be zero when the gradient is zero.
struct ReweighedMatrix {
  std::vector<SparseRow> rows;
  std::size_t n_features = 0;
  std::vector<ClassIndex> labels;
  /// Entries whose input was nonzero but whose gradient was exactly zero.
  std::size_t zero_gradient_entries = 0;
};

ReweighedMatrix reweigh(const FeatureMatrix& inputs, const SaliencyMap& saliency);

/// Dense elementwise form, J x K row-major on both sides.
std::vector<double> reweigh_dense(std::span<const double> inputs, std::span<const double> gradients);

struct SignEntry {
  FeatureIndex index = 0;
  std::int8_t sign = 0;  // -1 or +1; zeros are not stored

  friend bool operator==(const SignEntry&, const SignEntry&) = default;
};

struct SignMatrix {
  std::vector<std::vector<SignEntry>> rows;
  std::size_t n_features = 0;
  std::vector<ClassIndex> labels;

  std::size_t size() const { return rows.size(); }
  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    return n;
  }

  friend bool operator==(const SignMatrix&, const SignMatrix&) = default;
};

inline constexpr double kSignZeroThreshold = 1e-12;

/// -1 / 0 / +1 per entry; |x| <= threshold maps to 0.
std::int8_t sign_of(double value, double zero_threshold = kSignZeroThreshold);
SignMatrix sign_reduce(const ReweighedMatrix& reweighed, double zero_threshold = kSignZeroThreshold);

/// Sign of every stored value of a feature matrix; for TF-IDF input this is
/// presence (1) versus absence (0).
SignMatrix presence_signs(const FeatureMatrix& inputs);

/// Sign matrices use the sparse text layout with magic GRADRULES-SM v1 and
/// values restricted to -1 and 1.
void save_sign_matrix(const std::filesystem::path& path, const SignMatrix& signs,
                      std::span<const std::string> classes, const Vocabulary& vocabulary);
SparseText load_sign_matrix_text(const std::filesystem::path& path);
SignMatrix to_sign_matrix(const FeatureMatrix& m);

}  // namespace gradrules
