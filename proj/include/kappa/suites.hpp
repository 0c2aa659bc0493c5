#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kappa/residual.hpp"

namespace kappa {

/// Settings shared by every suite. Suites ignore what they do not use.
struct SuiteConfig {
  int n = 3;
  std::uint64_t seed = 1;
  int samples = 1000;       // decomposition, groupoid and twist sampling
  int rel_samples = 100;    // relations suites (finite differences are costlier)
  int functions = 5;
  double fd_step = 1e-5;
  int grid = 16;            // convolution grids, n = 1
  int bound_functions = 50;
  int mc_samples = 100000;  // per (b, b1) pair in the measure suite
  int mc_pairs = 8;
  std::map<std::string, double> tolerance;  // overrides by residual name
};

/// Names accepted by run_suite, in report order.
const std::vector<std::string>& suite_names();
/// Suites driven by `grid` (n = 1 only).
bool is_grid_suite(const std::string& name);

/// Throws ConfigError for an unknown suite name.
Residuals run_suite(const std::string& name, const SuiteConfig& cfg);

/// Replace tolerances named in cfg.tolerance and recompute pass flags.
void apply_tolerances(Residuals& rs, const std::map<std::string, double>& tol);

// standalone runners behind the first two suites
Residuals decomposition_checks(int n, int samples, std::uint64_t seed);
Residuals groupoid_checks(int n, int samples, std::uint64_t seed);

}  // namespace kappa
