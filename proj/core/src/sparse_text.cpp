#include "gradrules/sparse_text.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace gradrules {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw IoError("malformed number: " + std::string(text));
  }
  return v;
}

namespace {

template <typename Int>
Int parse_int(std::string_view text) {
  Int v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw IoError("malformed integer: " + std::string(text));
  }
  return v;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

constexpr std::string_view kUnlabeled = "?";

}  // namespace

void write_sparse_text(std::ostream& out, std::string_view magic, const SparseText& data) {
  const auto& m = data.matrix;
  if (!m.labels.empty() && m.labels.size() != m.rows.size()) {
    throw Error("sparse text: label count does not match row count");
  }
  out << magic << '\n';
  out << "#classes";
  for (const auto& c : data.classes) out << '\t' << c;
  out << '\n';
  out << "#documents\t" << data.vocabulary.n_documents() << '\n';
  for (std::size_t i = 0; i < data.vocabulary.size(); ++i) {
    const auto idx = static_cast<FeatureIndex>(i);
    out << data.vocabulary.term(idx) << '\t' << data.vocabulary.document_frequency(idx) << '\n';
  }
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    if (m.labels.empty()) {
      out << kUnlabeled;
    } else {
      out << data.classes.at(m.labels[r]);
    }
    out << '\t';
    bool first = true;
    for (const auto& e : m.rows[r]) {
      if (!first) out << ' ';
      out << e.index << ':' << format_double(e.value);
      first = false;
    }
    out << '\n';
  }
}

SparseText read_sparse_text(std::istream& in, std::string_view expected_magic) {
  std::string line;
  if (!std::getline(in, line) || line != expected_magic) {
    throw IoError("expected header '" + std::string(expected_magic) + "'");
  }
  SparseText data;
  std::size_t n_documents = 0;
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  bool in_rows = false;
  bool any_unlabeled = false;
  bool any_labeled = false;
  std::vector<ClassIndex> labels;

  while (std::getline(in, line)) {
    if (!in_rows && line.starts_with('#')) {
      const auto parts = split_tabs(line);
      if (parts[0] == "#classes") {
        for (std::size_t i = 1; i < parts.size(); ++i) data.classes.emplace_back(parts[i]);
      } else if (parts[0] == "#documents" && parts.size() == 2) {
        n_documents = parse_int<std::size_t>(parts[1]);
      } else {
        throw IoError("unknown metadata line: " + line);
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError("malformed line: " + line);
    const std::string_view head(line.data(), tab);
    const std::string_view tail(line.data() + tab + 1, line.size() - tab - 1);
    if (!in_rows && all_digits(tail)) {
      terms.emplace_back(head);
      df.push_back(parse_int<std::uint32_t>(tail));
      continue;
    }
    if (!in_rows) {
      in_rows = true;
      data.vocabulary = Vocabulary(std::move(terms), std::move(df), n_documents);
      data.matrix.n_features = data.vocabulary.size();
    }
    if (head == kUnlabeled) {
      any_unlabeled = true;
      labels.push_back(0);
    } else {
      any_labeled = true;
      std::size_t c = 0;
      while (c < data.classes.size() && data.classes[c] != head) ++c;
      if (c == data.classes.size()) throw IoError("row label not in #classes: " + std::string(head));
      labels.push_back(c);
    }
    SparseRow row;
    std::size_t pos = 0;
    while (pos < tail.size()) {
      auto end = tail.find(' ', pos);
      if (end == std::string_view::npos) end = tail.size();
      const auto item = tail.substr(pos, end - pos);
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw IoError("malformed entry: " + std::string(item));
      const auto idx = parse_int<FeatureIndex>(item.substr(0, colon));
      if (idx >= data.matrix.n_features) throw IoError("feature index out of range in: " + line);
      if (!row.empty() && row.back().index >= idx) throw IoError("unsorted row: " + line);
      row.push_back({idx, parse_double(item.substr(colon + 1))});
      pos = end + 1;
    }
    data.matrix.rows.push_back(std::move(row));
  }
  if (!in_rows) {
    data.vocabulary = Vocabulary(std::move(terms), std::move(df), n_documents);
    data.matrix.n_features = data.vocabulary.size();
  }
  if (any_labeled && any_unlabeled) throw IoError("mixed labeled and unlabeled rows");
  if (any_labeled) data.matrix.labels = std::move(labels);
  return data;
}

void save_sparse_text(const std::filesystem::path& path, std::string_view magic, const SparseText& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_sparse_text(out, magic, data);
  if (!out) throw IoError("write failed: " + path.string());
}

SparseText load_sparse_text(const std::filesystem::path& path, std::string_view expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_sparse_text(in, expected_magic);
}

}  // namespace gradrules
