#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Reusable property checks shared by the unit tests and the acceptance
// binary. Each returns a verdict plus a one-line description of what was
// measured.
namespace gradrules::testing {

struct CheckResult {
  bool passed = false;
  std::string detail;
};

struct GradientCheckOptions {
  std::size_t networks = 20;
  std::size_t inputs = 20;
  std::size_t hidden = 16;
  std::size_t outputs = 4;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 2024;
};

/// Backprop input gradients against central differences of an independent
/// forward pass. Points whose ReLU pattern changes within +-step are
/// resampled.
CheckResult check_gradients(const GradientCheckOptions& options = {});

struct PlantedCheckOptions {
  std::size_t datasets = 50;
  double noise = 0.05;
  double noisy_min_f = 0.95;
  std::size_t noisy_min_passing = 45;
  std::uint64_t seed = 1;
};

/// Noise-free planted DNFs must be recovered exactly (held-out F = 1);
/// with label noise, enough datasets must reach the held-out F bar.
CheckResult check_planted_dnf(const PlantedCheckOptions& options = {});

/// Every 3 x 4 table with cells in [0, max_count], compared with the
/// double-sum reference. Tables are enumerated up to column order
/// (checked separately by check_mi_properties).
CheckResult check_mi_exhaustive(std::uint64_t max_count = 5, double tolerance = 1e-12);

CheckResult check_softmax_normalization();
CheckResult check_gradient_sum_zero();
CheckResult check_sign_scale_invariance();
CheckResult check_mi_properties();
CheckResult check_prune_precision();
CheckResult check_min_cover();
CheckResult check_first_match();
CheckResult check_coverage_replay();

struct NamedCheck {
  std::string name;
  CheckResult (*run)();
};

/// All invariant checks in a fixed order.
std::vector<NamedCheck> invariant_checks();

}  // namespace gradrules::testing
