#include "gradrules/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace gradrules {

namespace detail {
std::string_view bundled_stopword_text();
}

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

const std::unordered_set<std::string_view>& stopwords() {
  static const auto* set = [] {
    auto* s = new std::unordered_set<std::string_view>();
    std::string_view text = detail::bundled_stopword_text();
    while (!text.empty()) {
      const auto eol = text.find('\n');
      std::string_view line = text.substr(0, eol);
      text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      s->insert(line);
    }
    return s;
  }();
  return *set;
}

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// "Key: value" or a bare "Key:".
bool is_header_line(std::string_view line) {
  if (line.empty() || !((line[0] >= 'A' && line[0] <= 'Z') || (line[0] >= 'a' && line[0] <= 'z'))) {
    return false;
  }
  std::size_t i = 1;
  while (i < line.size() && (is_ascii_alnum(line[i]) || line[i] == '-' || line[i] == '_')) ++i;
  if (i >= line.size() || line[i] != ':') return false;
  return i + 1 == line.size() || line[i + 1] == ' ' || line[i + 1] == '\t' || line[i + 1] == '\r';
}

bool is_quote_line(std::string_view line) {
  const auto t = trim(line);
  if (!t.empty() && (t.front() == '>' || t.front() == '|')) return true;
  return t.ends_with("writes:") || t.ends_with("wrote:");
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const auto eol = text.find('\n', start);
    if (eol == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, eol - start));
    start = eol + 1;
  }
  return lines;
}

std::string strip_once(std::string_view raw) {
  auto lines = split_lines(raw);
  std::size_t begin = 0;
  if (!lines.empty() && is_header_line(lines[0])) {
    begin = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) {
        begin = i + 1;
        break;
      }
    }
  }
  std::size_t end = lines.size();
  for (std::size_t i = lines.size(); i-- > begin;) {
    if (trim(lines[i]) == "--") {
      end = i;
      break;
    }
  }
  std::string out;
  bool first = true;
  for (std::size_t i = begin; i < end; ++i) {
    if (is_quote_line(lines[i])) continue;
    if (!first) out.push_back('\n');
    out.append(lines[i]);
    first = false;
  }
  return out;
}

std::size_t class_of(std::span<const std::string> classes, const std::string& label) {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) throw Error("unknown class label: " + label);
  return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace

Corpus load_corpus(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("corpus directory not found: " + root.string());
  Corpus corpus;
  for (const auto& class_dir : sorted_entries(root)) {
    if (!fs::is_directory(class_dir)) continue;
    const std::string label = class_dir.filename().string();
    corpus.classes.push_back(label);
    std::size_t count = 0;
    for (const auto& file : sorted_entries(class_dir)) {
      if (!fs::is_regular_file(file)) continue;
      corpus.documents.push_back({label + "/" + file.filename().string(), label, read_file(file)});
      ++count;
    }
    if (count == 0) spdlog::warn("class directory {} is empty", class_dir.string());
  }
  if (corpus.classes.empty()) spdlog::warn("corpus directory {} has no class directories", root.string());
  std::sort(corpus.classes.begin(), corpus.classes.end());
  std::sort(corpus.documents.begin(), corpus.documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  return corpus;
}

std::string strip_metadata(std::string_view raw) {
  std::string current = strip_once(raw);
  while (true) {
    std::string next = strip_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

bool is_stopword(std::string_view term) { return stopwords().contains(term); }

std::size_t stopword_count() { return stopwords().size(); }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !is_stopword(current)) tokens.push_back(current);
    current.clear();
  };
  for (const char c : text) {
    if (is_ascii_alnum(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
                       std::size_t n_documents)
    : terms_(std::move(terms)), df_(std::move(document_frequency)), n_documents_(n_documents) {
  if (terms_.size() != df_.size()) throw Error("vocabulary terms and frequencies differ in length");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (df_[i] == 0) throw Error("vocabulary term with zero document frequency: " + terms_[i]);
    if (!index_.emplace(terms_[i], static_cast<FeatureIndex>(i)).second) {
      throw Error("duplicate vocabulary term: " + terms_[i]);
    }
  }
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> tokenized_documents) {
  std::map<std::string, std::uint32_t> df;
  for (const auto& tokens : tokenized_documents) {
    std::vector<std::string_view> unique(tokens.begin(), tokens.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (const auto t : unique) ++df[std::string(t)];
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> counts;
  terms.reserve(df.size());
  counts.reserve(df.size());
  for (auto& [term, count] : df) {
    terms.push_back(term);
    counts.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(counts), tokenized_documents.size());
}

std::optional<FeatureIndex> Vocabulary::find(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::idf(FeatureIndex index) const {
  const double n = static_cast<double>(n_documents_);
  return std::log((1.0 + n) / (1.0 + static_cast<double>(df_.at(index)))) + 1.0;
}

SparseRow tfidf_row(std::span<const std::string> tokens, const Vocabulary& vocabulary) {
  std::map<FeatureIndex, std::uint32_t> counts;
  for (const auto& t : tokens) {
    if (const auto idx = vocabulary.find(t)) ++counts[*idx];
  }
  SparseRow row;
  row.reserve(counts.size());
  double norm2 = 0.0;
  for (const auto& [idx, tf] : counts) {
    const double v = static_cast<double>(tf) * vocabulary.idf(idx);
    row.push_back({idx, v});
    norm2 += v * v;
  }
  if (!row.empty()) {
    const double norm = std::sqrt(norm2);
    for (auto& e : row) e.value /= norm;
  }
  return row;
}

namespace {

std::vector<std::vector<std::string>> tokenize_all(std::span<const Document> docs) {
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(tokenize(strip_metadata(d.raw)));
  return out;
}

FeatureMatrix assemble(std::span<const Document> docs, std::span<const std::string> classes,
                       const std::vector<std::vector<std::string>>& tokens, const Vocabulary& vocab) {
  FeatureMatrix m;
  m.n_features = vocab.size();
  m.rows.reserve(docs.size());
  m.labels.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    m.rows.push_back(tfidf_row(tokens[i], vocab));
    m.labels.push_back(class_of(classes, docs[i].label));
  }
  return m;
}

}  // namespace

Featurized featurize(std::span<const Document> docs, std::span<const std::string> classes) {
  const auto tokens = tokenize_all(docs);
  Vocabulary vocab = Vocabulary::build(tokens);
  if (vocab.size() == 0) throw Error("empty vocabulary");
  FeatureMatrix m = assemble(docs, classes, tokens, vocab);
  return {std::move(m), std::move(vocab)};
}

FeatureMatrix featurize(std::span<const Document> docs, std::span<const std::string> classes,
                        const Vocabulary& vocabulary) {
  if (vocabulary.size() == 0) throw Error("empty vocabulary");
  return assemble(docs, classes, tokenize_all(docs), vocabulary);
}

namespace {

std::map<std::string, std::vector<Document>> by_class(std::vector<Document> docs) {
  std::map<std::string, std::vector<Document>> out;
  for (auto& d : docs) out[d.label].push_back(std::move(d));
  return out;
}

}  // namespace

CorpusSplit split_corpus(const fs::path& root) {
  CorpusSplit split;
  const auto train_root = root / "train";
  const auto test_root = root / "test";
  if (fs::is_directory(train_root) && fs::is_directory(test_root)) {
    Corpus train = load_corpus(train_root);
    Corpus test = load_corpus(test_root);
    split.classes = train.classes;
    for (const auto& c : test.classes) {
      if (!std::binary_search(split.classes.begin(), split.classes.end(), c)) {
        throw Error("test class missing from train: " + c);
      }
    }
    for (auto& [label, docs] : by_class(std::move(train.documents))) {
      const std::size_t n_dev = (docs.size() + 5) / 10;
      const std::size_t n_train = docs.size() - n_dev;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        (i < n_train ? split.train : split.dev).push_back(std::move(docs[i]));
      }
    }
    split.test = std::move(test.documents);
  } else {
    Corpus all = load_corpus(root);
    split.classes = all.classes;
    for (auto& [label, docs] : by_class(std::move(all.documents))) {
      const std::size_t n = docs.size();
      const std::size_t n_train = (n * 700 + 500) / 1000;
      const std::size_t n_dev = std::min(n - n_train, (n * 75 + 500) / 1000);
      for (std::size_t i = 0; i < n; ++i) {
        auto& dst = i < n_train ? split.train : (i < n_train + n_dev ? split.dev : split.test);
        dst.push_back(std::move(docs[i]));
      }
    }
  }
  spdlog::info("corpus split: {} train, {} dev, {} test documents over {} classes", split.train.size(),
               split.dev.size(), split.test.size(), split.classes.size());
  return split;
}

DatasetSplit build_dataset(const CorpusSplit& split) {
  DatasetSplit ds;
  ds.classes = split.classes;
  auto train = featurize(split.train, split.classes);
  ds.vocabulary = std::move(train.vocabulary);
  ds.train = std::move(train.matrix);
  ds.dev = featurize(split.dev, split.classes, ds.vocabulary);
  ds.test = featurize(split.test, split.classes, ds.vocabulary);
  return ds;
}

}  // namespace gradrules
