#include <doctest.h>

#include "gradrules/rng.hpp"
#include "gradrules/transform.hpp"
#include "temp_dir.hpp"

using namespace gradrules;

namespace {

FeatureMatrix small_inputs() {
  FeatureMatrix m;
  m.n_features = 4;
  m.rows = {{{0, 0.5}, {2, 0.25}}, {{1, 1.0}}, {}};
  m.labels = {1, 0, 2};
  return m;
}

TrainedNetwork random_net(std::uint64_t seed) {
  NetworkConfig c;
  c.layer_sizes = {4, 6, 3};
  c.seed = seed;
  return TrainedNetwork::initialize(c);
}

}  // namespace

TEST_CASE("saliency targets") {
  const auto m = small_inputs();
  const auto net = random_net(3);
  const SaliencyMap pred(net, m, SaliencyTarget::PredictedClass);
  const SaliencyMap gold(net, m, SaliencyTarget::GoldClass);
  CHECK(pred.rows() == 3);
  CHECK(pred.cols() == 4);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(pred.target(j) == net.predict(m.rows[j]).predicted);
    CHECK(gold.target(j) == m.labels[j]);
    CHECK(gold.row(j) == net.input_gradient(m.rows[j], m.labels[j]));
  }
  std::vector<FeatureIndex> feats{2, 0};
  std::vector<double> out(2);
  gold.gather(0, feats, out);
  CHECK(out[0] == gold.row(0)[2]);
  CHECK(out[1] == gold.row(0)[0]);

  auto unlabeled = m;
  unlabeled.labels.clear();
  CHECK_THROWS_AS(saliency_map(net, unlabeled, SaliencyTarget::GoldClass), Error);
  CHECK_NOTHROW(saliency_map(net, unlabeled, SaliencyTarget::PredictedClass));
}

TEST_CASE("zero network gives an all-zero map") {
  NetworkConfig c;
  c.layer_sizes = {4, 6, 3};
  const auto net = TrainedNetwork::zeros(c);
  const auto m = small_inputs();
  const SaliencyMap s(net, m, SaliencyTarget::PredictedClass);
  CHECK(count_zero_gradients(s) == 12);
  const auto r = reweigh(m, s);
  CHECK(r.zero_gradient_entries == 3);
  CHECK(sign_reduce(r).nnz() == 0);
}

TEST_CASE("reweigh_dense") {
  const std::vector<double> x{0.0, 0.5, 2.0, 0.0};
  const std::vector<double> g{7.0, -2.0, 0.0, -1.0};
  const auto r = reweigh_dense(x, g);
  CHECK(r == std::vector<double>{0.0, -1.0, 0.0, 0.0});
  const std::vector<double> short_g{1.0};
  CHECK_THROWS_AS(reweigh_dense(x, short_g), Error);
}

TEST_CASE("reweigh keeps the input sparsity pattern") {
  const auto m = small_inputs();
  const auto net = random_net(8);
  const SaliencyMap s(net, m, SaliencyTarget::GoldClass);
  const auto r = reweigh(m, s);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.labels == m.labels);
  for (std::size_t j = 0; j < 3; ++j) {
    REQUIRE(r.rows[j].size() == m.rows[j].size());
    const auto g = s.row(j);
    for (std::size_t e = 0; e < m.rows[j].size(); ++e) {
      CHECK(r.rows[j][e].index == m.rows[j][e].index);
      CHECK(r.rows[j][e].value == m.rows[j][e].value * g[m.rows[j][e].index]);
    }
  }
}

TEST_CASE("sign_of") {
  CHECK(sign_of(0.7) == 1);
  CHECK(sign_of(-0.3) == -1);
  CHECK(sign_of(0.0) == 0);
  CHECK(sign_of(1e-13) == 0);
  CHECK(sign_of(-1e-12) == 0);
  CHECK(sign_of(2e-12) == 1);
}

TEST_CASE("sign_reduce") {
  ReweighedMatrix r;
  r.n_features = 3;
  r.rows = {{{0, -0.1}, {1, -5.0}, {2, -1e-3}}, {{0, 0.0}, {2, 4.0}}};
  r.labels = {0, 1};
  const auto s = sign_reduce(r);
  CHECK(s.rows[0] == std::vector<SignEntry>{{0, -1}, {1, -1}, {2, -1}});
  CHECK(s.rows[1] == std::vector<SignEntry>{{2, 1}});
  CHECK(s.labels == r.labels);
  CHECK(s.n_features == 3);
}

TEST_CASE("positive inputs with positive gradients reduce to all +1") {
  const std::vector<double> x{0.1, 0.2, 0.3};
  const std::vector<double> g{1.0, 0.5, 2.0};
  for (double v : reweigh_dense(x, g)) CHECK(sign_of(v) == 1);
}

TEST_CASE("presence_signs") {
  const auto s = presence_signs(small_inputs());
  CHECK(s.rows[0] == std::vector<SignEntry>{{0, 1}, {2, 1}});
  CHECK(s.rows[1] == std::vector<SignEntry>{{1, 1}});
  CHECK(s.rows[2].empty());
}

TEST_CASE("sign matrix file round-trip") {
  gradrules::testing::TempDir dir;
  SignMatrix s;
  s.n_features = 3;
  s.rows = {{{0, -1}, {2, 1}}, {}};
  s.labels = {1, 0};
  const std::vector<std::string> classes{"a", "b"};
  const Vocabulary v({"p", "q", "r"}, {1, 1, 1}, 2);
  save_sign_matrix(dir / "x.sm", s, classes, v);
  const auto text = load_sign_matrix_text(dir / "x.sm");
  CHECK(text.classes == classes);
  CHECK(text.vocabulary == v);
  CHECK(to_sign_matrix(text.matrix) == s);

  FeatureMatrix bad;
  bad.n_features = 1;
  bad.rows = {{{0, 0.5}}};
  CHECK_THROWS_AS(to_sign_matrix(bad), Error);
}
