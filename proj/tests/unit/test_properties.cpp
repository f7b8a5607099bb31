#include <doctest.h>

#include "checks.hpp"

namespace gt = gradrules::testing;

TEST_CASE("invariants") {
  for (const auto& check : gt::invariant_checks()) {
    SUBCASE(check.name.c_str()) {
      const auto r = check.run();
      CHECK_MESSAGE(r.passed, check.name << ": " << r.detail);
    }
  }
}

TEST_CASE("input gradients match finite differences") {
  gt::GradientCheckOptions o;
  o.networks = 5;
  const auto r = gt::check_gradients(o);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("planted DNFs are recovered") {
  gt::PlantedCheckOptions o;
  o.datasets = 10;
  o.noisy_min_passing = 9;
  const auto r = gt::check_planted_dnf(o);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("mutual information over small tables") {
  const auto r = gt::check_mi_exhaustive(2);
  CHECK_MESSAGE(r.passed, r.detail);
}
