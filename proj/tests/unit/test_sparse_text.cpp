#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "gradrules/rng.hpp"
#include "gradrules/sparse_text.hpp"
#include "temp_dir.hpp"

using namespace gradrules;

namespace {

SparseText sample() {
  SparseText s;
  s.classes = {"sci.med", "sci.space"};
  s.vocabulary = Vocabulary({"doctor", "orbit", "x"}, {2, 1, 1}, 3);
  s.matrix.n_features = 3;
  s.matrix.rows = {{{0, 0.1}, {2, 1.0 / 3.0}}, {}, {{1, -2.5e-300}}};
  s.matrix.labels = {1, 0, 1};
  return s;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  const double denorm = std::numeric_limits<double>::denorm_min();
  CHECK(parse_double(format_double(denorm)) == denorm);
}

TEST_CASE("parse_double rejects garbage") {
  CHECK_THROWS_AS(parse_double("abc"), IoError);
  CHECK_THROWS_AS(parse_double("1.5x"), IoError);
  CHECK_THROWS_AS(parse_double(""), IoError);
}

TEST_CASE("sparse text stream round-trip is bit exact") {
  const auto s = sample();
  std::stringstream buf;
  write_sparse_text(buf, kFeatureCacheMagic, s);
  const auto back = read_sparse_text(buf, kFeatureCacheMagic);
  CHECK(back.classes == s.classes);
  CHECK(back.vocabulary == s.vocabulary);
  CHECK(back.matrix == s.matrix);
}

TEST_CASE("unlabeled matrices round-trip") {
  auto s = sample();
  s.matrix.labels.clear();
  std::stringstream buf;
  write_sparse_text(buf, kFeatureCacheMagic, s);
  CHECK(buf.str().find("\n?\t") != std::string::npos);
  const auto back = read_sparse_text(buf, kFeatureCacheMagic);
  CHECK(back.matrix.labels.empty());
  CHECK(back.matrix.rows == s.matrix.rows);
}

TEST_CASE("file round-trip and errors") {
  gradrules::testing::TempDir dir;
  const auto s = sample();
  save_sparse_text(dir / "a.fm", kFeatureCacheMagic, s);
  CHECK(load_sparse_text(dir / "a.fm", kFeatureCacheMagic).matrix == s.matrix);
  CHECK_THROWS_AS(load_sparse_text(dir / "a.fm", kSignMatrixMagic), IoError);
  CHECK_THROWS_AS(load_sparse_text(dir / "missing.fm", kFeatureCacheMagic), IoError);

  std::stringstream bad;
  bad << kFeatureCacheMagic << "\n#classes\tx\n#documents\t1\nx\t1\nx\t0:1 0:2\n";
  CHECK_THROWS_AS(read_sparse_text(bad, kFeatureCacheMagic), IoError);
}
