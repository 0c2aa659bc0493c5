#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kappa/suites.hpp"

namespace kappa {

/// Everything a verify/grid run depends on. Two runs with equal RunConfig
/// produce byte-identical reports unless `timing` is set.
struct RunConfig {
  SuiteConfig suite;
  std::vector<std::string> suites;  // empty means the command's default set
  bool timing = false;
  // single measure point for `grid --measure`
  std::optional<std::array<double, 3>> measure;  // M, delta, eps
};

/// Flat `key = value` text. '#' starts a comment. Keys are the long flag names
/// without dashes (fd-step and fd_step both accepted); tol-NAME sets a tolerance.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);
/// Apply key/value pairs on top of cfg. Throws ConfigError on unknown keys or bad values.
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);
/// n >= 1, samples >= 1, fd_step in (0, 1e-2], grid >= 4, known suite names.
void validate(const RunConfig& cfg);

struct SuiteResult {
  std::string name;
  int n = 1;
  Residuals residuals;
  std::vector<std::string> notes;
  bool pass() const { return all_pass(residuals); }
};

struct Report {
  std::string command;
  RunConfig config;
  std::vector<SuiteResult> suites;
  double wall_seconds = -1.0;  // written only when config.timing
  bool pass() const;
};

/// Runs the named suites; grid suites always run at n = 1.
Report run_verify(const RunConfig& cfg, const std::string& command = "verify");

/// JSON text, keys in a fixed order, trailing newline.
std::string to_json(const Report& r);
/// name,max_residual,samples,step,tolerance,pass per residual.
std::string to_csv(const Report& r);

}  // namespace kappa
