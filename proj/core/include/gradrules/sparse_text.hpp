#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradrules/corpus.hpp"
#include "gradrules/sparse.hpp"

namespace gradrules {

inline constexpr std::string_view kFeatureCacheMagic = "GRADRULES-FM v1";
inline constexpr std::string_view kSignMatrixMagic = "GRADRULES-SM v1";

/// Contents of a sparse text file.
///
/// Layout, one record per line:
///
///     GRADRULES-FM v1
///     #classes<TAB>name<TAB>name...
///     #documents<TAB>N
///     term<TAB>df                       (one per vocabulary entry, index order)
///     label<TAB>idx:val idx:val ...     (one per row; label "?" when unlabeled)
///
/// Values use the shortest decimal form that parses back to the same double,
/// so a write/read cycle is bit-exact.
struct SparseText {
  std::vector<std::string> classes;
  Vocabulary vocabulary;
  FeatureMatrix matrix;
};

void write_sparse_text(std::ostream& out, std::string_view magic, const SparseText& data);
SparseText read_sparse_text(std::istream& in, std::string_view expected_magic);

void save_sparse_text(const std::filesystem::path& path, std::string_view magic, const SparseText& data);
SparseText load_sparse_text(const std::filesystem::path& path, std::string_view expected_magic);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace gradrules
