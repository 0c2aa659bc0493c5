#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace kappa {

/// Outcome of one numerical identity check.
struct Residual {
  std::string name;
  double max_residual = 0.0;
  long samples = 0;
  double step = 0.0;  // finite-difference step, 0 when none is involved
  double tolerance = 0.0;
  bool pass = false;

  Residual() = default;
  Residual(std::string n, double tol, double h = 0.0) : name(std::move(n)), step(h), tolerance(tol) {}

  void add(double r) {
    ++samples;
    if (!std::isfinite(r)) r = std::numeric_limits<double>::infinity();
    if (r > max_residual) max_residual = r;
    pass = samples > 0 && max_residual <= tolerance;
  }
  void finish() { pass = samples > 0 && max_residual <= tolerance; }
};

using Residuals = std::vector<Residual>;

inline bool all_pass(const Residuals& rs) {
  for (const auto& r : rs)
    if (!r.pass) return false;
  return !rs.empty();
}

inline void append(Residuals& to, const Residuals& from) { to.insert(to.end(), from.begin(), from.end()); }

}  // namespace kappa
