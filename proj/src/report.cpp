#include "kappa/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kappa/errors.hpp"
#include "kappa/twist.hpp"

namespace kappa {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string normalize_key(std::string k) {
  // fd-step and fd_step are the same key; residual names after tol- keep their underscores
  if (k.rfind("tol-", 0) == 0 || k.rfind("tol_", 0) == 0) return "tol-" + k.substr(4);
  for (auto& ch : k)
    if (ch == '_') ch = '-';
  return k;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "M=10 delta=0.5 eps=0.05", commas or spaces between the fields
std::array<double, 3> parse_measure(const std::string& v) {
  std::string s = v;
  for (auto& ch : s)
    if (ch == ',') ch = ' ';
  std::stringstream ss(s);
  std::string tok;
  std::map<std::string, double> kv;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("measure expects M=.. delta=.. eps=.., got '" + tok + "'");
    kv[tok.substr(0, eq)] = to_double("measure", tok.substr(eq + 1));
  }
  for (const char* k : {"M", "delta", "eps"})
    if (!kv.count(k)) throw ConfigError(std::string("measure is missing ") + k);
  if (kv.size() != 3) throw ConfigError("measure takes exactly M, delta, eps");
  return {kv["M"], kv["delta"], kv["eps"]};
}

nlohmann::ordered_json residual_json(const Residual& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  // non-finite residuals have no JSON number
  if (std::isfinite(r.max_residual))
    j["max_residual"] = r.max_residual;
  else
    j["max_residual"] = nullptr;
  j["samples"] = r.samples;
  j["step"] = r.step;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

std::vector<std::string> suite_notes(const std::string& name) {
  if (name == "twist")
    return {"right coaction: only the pointwise identity is checked; its continuity is not verified",
            "symplectic lift of the affine action: only the base map is checked"};
  if (name == "convolution")
    return {"functions are taken against a fixed trivializing density; no half-density bundle"};
  return {};
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[normalize_key(key)] = value;
  }
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& raw) {
  SuiteConfig& s = cfg.suite;
  for (const auto& [k0, v] : raw) {
    const std::string k = normalize_key(k0);
    if (k.rfind("tol-", 0) == 0) {
      const std::string name = k.substr(4);
      if (name.empty()) throw ConfigError("tolerance key without a residual name");
      const double t = to_double(k, v);
      if (!(t >= 0.0)) throw ConfigError("tolerance must be >= 0: " + k);
      s.tolerance[name] = t;
    } else if (k == "n") {
      s.n = static_cast<int>(to_int(k, v));
    } else if (k == "seed") {
      const long long seed = to_int(k, v);
      if (seed < 0) throw ConfigError("seed must be >= 0");
      s.seed = static_cast<std::uint64_t>(seed);
    } else if (k == "samples") {
      s.samples = static_cast<int>(to_int(k, v));
    } else if (k == "rel-samples") {
      s.rel_samples = static_cast<int>(to_int(k, v));
    } else if (k == "functions") {
      s.functions = static_cast<int>(to_int(k, v));
    } else if (k == "fd-step") {
      s.fd_step = to_double(k, v);
    } else if (k == "grid") {
      s.grid = static_cast<int>(to_int(k, v));
    } else if (k == "bound-functions") {
      s.bound_functions = static_cast<int>(to_int(k, v));
    } else if (k == "mc-samples") {
      s.mc_samples = static_cast<int>(to_int(k, v));
    } else if (k == "mc-pairs") {
      s.mc_pairs = static_cast<int>(to_int(k, v));
    } else if (k == "suite") {
      cfg.suites = split_list(v);
    } else if (k == "timing") {
      if (v == "true" || v == "1")
        cfg.timing = true;
      else if (v == "false" || v == "0")
        cfg.timing = false;
      else
        throw ConfigError("timing must be true or false");
    } else if (k == "measure") {
      cfg.measure = parse_measure(v);
    } else {
      throw ConfigError("unknown config key '" + k0 + "'");
    }
  }
}

void validate(const RunConfig& cfg) {
  const SuiteConfig& s = cfg.suite;
  if (s.n < 1) throw ConfigError("n must be >= 1");
  if (s.samples < 1 || s.rel_samples < 1) throw ConfigError("samples must be >= 1");
  if (s.functions < 1) throw ConfigError("functions must be >= 1");
  if (!(s.fd_step > 0.0 && s.fd_step <= 1e-2)) throw ConfigError("fd-step must lie in (0, 1e-2]");
  if (s.grid < 4 || s.grid > 64) throw ConfigError("grid must lie in [4, 64]");
  if (s.bound_functions < 1) throw ConfigError("bound-functions must be >= 1");
  if (s.mc_samples < 100 || s.mc_pairs < 1) throw ConfigError("mc-samples must be >= 100 and mc-pairs >= 1");
  std::set<std::string> known(suite_names().begin(), suite_names().end());
  known.insert("all");
  for (const auto& name : cfg.suites)
    if (!known.count(name)) throw ConfigError("unknown suite '" + name + "'");
  if (cfg.measure) {
    const auto [M, d, e] = *cfg.measure;
    if (!(M > 1.0 && 0.0 < e && e < d && d < 1.0)) throw ConfigError("measure needs M > 1 and 0 < eps < delta < 1");
  }
}

bool Report::pass() const {
  if (suites.empty()) return false;
  for (const auto& s : suites)
    if (!s.pass()) return false;
  return true;
}

Report run_verify(const RunConfig& cfg, const std::string& command) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.command = command;
  rep.config = cfg;

  std::vector<std::string> names;
  for (const auto& s : cfg.suites) {
    if (s == "all")
      names.insert(names.end(), suite_names().begin(), suite_names().end());
    else
      names.push_back(s);
  }
  for (const auto& name : names) {
    SuiteConfig sc = cfg.suite;
    if (is_grid_suite(name)) sc.n = 1;
    rep.suites.push_back({name, sc.n, run_suite(name, sc), suite_notes(name)});
  }

  if (cfg.measure) {
    const auto [M, d, e] = *cfg.measure;
    MeasureConfig mc;
    mc.M = M;
    mc.delta = d;
    mc.eps = e;
    mc.samples = cfg.suite.mc_samples;
    mc.pairs = cfg.suite.mc_pairs;
    mc.seed = cfg.suite.seed;
    const MeasureReport m = measure_bound_check(mc);
    Residual r("measure_estimate_over_bound", 1.0);
    r.add((m.estimate + m.margin) / m.bound);
    Residuals rs{r};
    apply_tolerances(rs, cfg.suite.tolerance);
    rep.suites.push_back({"measure_point", 1, rs, {}});
  }

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string to_json(const Report& r) {
  using nlohmann::ordered_json;
  const SuiteConfig& s = r.config.suite;
  ordered_json cfg;
  cfg["n"] = s.n;
  cfg["seed"] = s.seed;
  cfg["samples"] = s.samples;
  cfg["rel_samples"] = s.rel_samples;
  cfg["functions"] = s.functions;
  cfg["fd_step"] = s.fd_step;
  cfg["grid"] = s.grid;
  cfg["bound_functions"] = s.bound_functions;
  cfg["mc_samples"] = s.mc_samples;
  cfg["mc_pairs"] = s.mc_pairs;
  cfg["suites"] = r.config.suites;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : s.tolerance) tol[k] = v;  // std::map: sorted
  cfg["tolerance_overrides"] = tol;
  if (r.config.measure) {
    const auto [M, d, e] = *r.config.measure;
    cfg["measure"] = {{"M", M}, {"delta", d}, {"eps", e}};
  }

  ordered_json j;
  j["schema"] = 1;
  j["command"] = r.command;
  j["config"] = cfg;
  ordered_json suites = ordered_json::array();
  for (const auto& su : r.suites) {
    ordered_json o;
    o["name"] = su.name;
    o["n"] = su.n;
    o["pass"] = su.pass();
    ordered_json rs = ordered_json::array();
    for (const auto& res : su.residuals) rs.push_back(residual_json(res));
    o["residuals"] = rs;
    if (!su.notes.empty()) o["notes"] = su.notes;
    suites.push_back(o);
  }
  j["suites"] = suites;
  j["pass"] = r.pass();
  if (r.config.timing) j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

std::string to_csv(const Report& r) {
  std::ostringstream os;
  os.precision(17);
  os << "suite,n,name,max_residual,samples,step,tolerance,pass\n";
  for (const auto& su : r.suites)
    for (const auto& res : su.residuals)
      os << su.name << ',' << su.n << ',' << res.name << ',' << res.max_residual << ',' << res.samples << ','
         << res.step << ',' << res.tolerance << ',' << (res.pass ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace kappa
