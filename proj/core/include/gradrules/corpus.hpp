#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gradrules/common.hpp"
#include "gradrules/sparse.hpp"

namespace gradrules {

struct Document {
  std::string id;     // "<label>/<filename>"
  std::string label;  // class directory name
  std::string raw;
};

/// Documents of one directory tree plus the class names found there.
/// Classes with no documents are kept so indices stay stable.
struct Corpus {
  std::vector<std::string> classes;  // sorted
  std::vector<Document> documents;   // sorted by id
};

/// Reads `<root>/<label>/<file>`. Throws IoError when root is missing.
Corpus load_corpus(const std::filesystem::path& root);

/// Removes a leading "Key: value" header block, quoted lines ("> ", "| ",
/// "... writes:", "... wrote:") and everything from the last "--" line.
/// Applied to a fixpoint, so the result is idempotent.
std::string strip_metadata(std::string_view raw);

/// Lowercased runs of ASCII letters and digits, length >= 2, minus stopwords.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view term);
std::size_t stopword_count();

/// Term index, document frequencies and the number of documents the
/// frequencies were counted on. Terms are indexed in lexicographic order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
             std::size_t n_documents);

  static Vocabulary build(std::span<const std::vector<std::string>> tokenized_documents);

  std::optional<FeatureIndex> find(std::string_view term) const;
  const std::string& term(FeatureIndex index) const { return terms_.at(index); }
  std::uint32_t document_frequency(FeatureIndex index) const { return df_.at(index); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  std::size_t n_documents() const { return n_documents_; }

  /// ln((1 + N) / (1 + df)) + 1
  double idf(FeatureIndex index) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.n_documents_ == b.n_documents_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::size_t n_documents_ = 0;
  std::unordered_map<std::string, FeatureIndex> index_;
};

/// TF-IDF row for one token list: raw counts times idf, L2-normalized.
/// Terms unknown to the vocabulary are dropped.
SparseRow tfidf_row(std::span<const std::string> tokens, const Vocabulary& vocabulary);

struct Featurized {
  FeatureMatrix matrix;
  Vocabulary vocabulary;
};

/// Train-time featurization: builds the vocabulary from `docs`.
/// Throws Error("empty vocabulary") when no document yields a token.
Featurized featurize(std::span<const Document> docs, std::span<const std::string> classes);

/// Test-time featurization against an existing vocabulary.
FeatureMatrix featurize(std::span<const Document> docs, std::span<const std::string> classes,
                        const Vocabulary& vocabulary);

struct CorpusSplit {
  std::vector<std::string> classes;
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;
};

/// Uses `<root>/train` and `<root>/test` when both exist (dev = last 10% of
/// each class in train), otherwise splits each class 70 / 7.5 / 22.5 in id
/// order. No randomness.
CorpusSplit split_corpus(const std::filesystem::path& root);

struct DatasetSplit {
  std::vector<std::string> classes;
  Vocabulary vocabulary;
  FeatureMatrix train;
  FeatureMatrix dev;
  FeatureMatrix test;
};

DatasetSplit build_dataset(const CorpusSplit& split);

}  // namespace gradrules
