#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kappa/decomp.hpp"
#include "kappa/errors.hpp"
#include "kappa/report.hpp"

using namespace kappa;
using nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitConfig = 2;

// --tol-NAME v and --tol-NAME=v are pulled out before CLI11 sees argv
std::map<std::string, std::string> take_tolerances(std::vector<std::string>& args) {
  std::map<std::string, std::string> tol;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--tol-", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    std::string key = a.substr(2), value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= args.size()) throw ConfigError(a + " needs a value");
      value = args[++i];
    }
    tol[key] = value;
  }
  args = rest;
  return tol;
}

ordered_json vec_json(const Vec& v) {
  ordered_json j = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

ordered_json mat_json(const Mat& m) {
  ordered_json j = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) j.push_back(vec_json(m.row(i).transpose()));
  return j;
}

ordered_json b_json(const BParam& b) {
  return {{"Lambda", mat_json(b.Lambda)}, {"u", vec_json(b.u)}, {"w", vec_json(b.w)}, {"alpha", b.alpha}};
}
ordered_json c_json(const CParam& c) { return {{"s", c.s}, {"y", vec_json(c.y)}}; }
ordered_json a_json(const AParam& a) { return {{"z", vec_json(a.z)}, {"U", mat_json(a.U)}, {"d", a.d}}; }

double recon(const Mat& g, const GroupMatrix& f1, const GroupMatrix& f2) {
  return (g - (f1 * f2).mat()).cwiseAbs().maxCoeff() / (1.0 + g.cwiseAbs().maxCoeff());
}

Mat parse_matrix(const std::string& text) {
  std::string s = text;
  for (auto& ch : s)
    if (ch == ',' || ch == ';') ch = ' ';
  std::stringstream ss(s);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t pos = 0;
      vals.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse matrix entry '" + tok + "'");
    }
  }
  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(vals.size()))));
  if (m * m != static_cast<int>(vals.size()) || m < 3)
    throw ConfigError("matrix needs m*m entries with m = n + 2 >= 3, got " + std::to_string(vals.size()));
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = vals[i * m + j];
  return g;
}

int cmd_decompose(int n, std::uint64_t seed, const std::string& kind, const std::string& matrix, bool identity,
                  const std::string& out) {
  GroupMatrix g;
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "decompose";
  if (!matrix.empty()) {
    j["input"] = "matrix";
    g = GroupMatrix::checked(parse_matrix(matrix));
  } else if (identity) {
    if (n < 1) throw ConfigError("n must be >= 1");
    j["input"] = "identity";
    g = GroupMatrix::identity(n);
  } else {
    if (n < 1) throw ConfigError("n must be >= 1");
    const std::map<std::string, Kind> kinds{{"a", Kind::A}, {"b", Kind::B}, {"c", Kind::C}, {"g", Kind::G}};
    const auto it = kinds.find(kind);
    if (it == kinds.end()) throw ConfigError("kind must be one of a, b, c, g");
    j["input"] = {{"kind", kind}, {"n", n}, {"seed", seed}};
    g = sample_element(it->second, n, seed);
  }
  const Mat& m = g.mat();
  j["matrix"] = mat_json(m);
  j["eta_residual"] = g.eta_residual();

  const BCFactors bc = factor_bc(g);
  j["bc"] = {{"b", b_json(bc.b)}, {"c", c_json(bc.c)}, {"residual", recon(m, embed_b(bc.b), embed_c(bc.c))}};
  const CBFactors cb = factor_cb(g);
  j["cb"] = {{"c", c_json(cb.c)}, {"b", b_json(cb.b)}, {"residual", recon(m, embed_c(cb.c), embed_b(cb.b))}};
  // CA and AC exist only when the relevant B factor has alpha != 0
  try {
    const CAFactors ca = factor_ca(g);
    j["ca"] = {{"c", c_json(ca.c)}, {"a", a_json(ca.a)}, {"residual", recon(m, embed_c(ca.c), embed_a(ca.a))}};
  } catch (const DomainError& e) {
    j["ca"] = {{"undefined", e.what()}};
  }
  try {
    const ACFactors ac = factor_ac(g);
    j["ac"] = {{"a", a_json(ac.a)}, {"c", c_json(ac.c)}, {"residual", recon(m, embed_a(ac.a), embed_c(ac.c))}};
  } catch (const DomainError& e) {
    j["ac"] = {{"undefined", e.what()}};
  }

  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + out);
    f << text;
  }
  return kExitPass;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

// flags that were actually given, keyed like the config file
struct RunFlags {
  std::optional<int> n, samples, rel_samples, functions, grid, bound_functions, mc_samples, mc_pairs;
  std::optional<long long> seed;
  std::optional<double> fd_step;
  std::vector<std::string> suites;
  std::string config, out, csv, measure;
  bool timing = false;
};

void add_run_flags(CLI::App* app, RunFlags& f, bool grid) {
  app->add_option("--n", f.n, "dimension n >= 1 (grid suites always use n = 1)");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--samples", f.samples, "samples for point checks");
  app->add_option("--rel-samples", f.rel_samples, "samples for the finite-difference suites");
  app->add_option("--functions", f.functions, "test functions per sample");
  app->add_option("--fd-step", f.fd_step, "finite-difference step in (0, 1e-2]");
  app->add_option("--grid", f.grid, "grid points per axis for the convolution suite");
  app->add_option("--bound-functions", f.bound_functions, "random functions for the operator-norm bound");
  app->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples per (b, b1) pair");
  app->add_option("--mc-pairs", f.mc_pairs, "sampled (b, b1) pairs");
  app->add_option("--suite", f.suites, "suite name, repeatable or comma separated; 'all' for every suite")
      ->delimiter(',');
  app->add_option("--config", f.config, "flat key = value config file");
  app->add_option("--out", f.out, "write the JSON report here instead of stdout");
  app->add_option("--csv", f.csv, "also write the residual table as CSV");
  app->add_flag("--timing", f.timing, "include wall time in the report (breaks byte-identity)");
  if (grid) app->add_option("--measure", f.measure, "single measure check, e.g. \"M=10 delta=0.5 eps=0.05\"");
}

RunConfig build_config(const RunFlags& f, const std::map<std::string, std::string>& tol, bool grid) {
  RunConfig cfg;
  if (grid) cfg.suite.n = 1;
  if (!f.config.empty()) apply_config(cfg, read_config_file(f.config));
  // flags override the file
  std::map<std::string, std::string> kv;
  auto put = [&](const char* k, const auto& v) {
    if (v) {
      std::ostringstream os;
      os.precision(17);
      os << *v;
      kv[k] = os.str();
    }
  };
  put("n", f.n);
  put("seed", f.seed);
  put("samples", f.samples);
  put("rel-samples", f.rel_samples);
  put("functions", f.functions);
  put("fd-step", f.fd_step);
  put("grid", f.grid);
  put("bound-functions", f.bound_functions);
  put("mc-samples", f.mc_samples);
  put("mc-pairs", f.mc_pairs);
  for (const auto& [k, v] : tol) kv[k] = v;
  apply_config(cfg, kv);
  if (!f.suites.empty()) cfg.suites = f.suites;
  if (f.timing) cfg.timing = true;
  if (!f.measure.empty()) apply_config(cfg, {{"measure", f.measure}});

  if (grid) {
    if (cfg.suite.n != 1) throw ConfigError("grid suites need n = 1");
    if (cfg.suites.empty() && !cfg.measure) cfg.suites = {"convolution", "twist_generator", "measure"};
    for (const auto& s : cfg.suites)
      if (s != "all" && !is_grid_suite(s)) throw ConfigError("'" + s + "' is not a grid suite");
  } else {
    if (cfg.measure) throw ConfigError("--measure belongs to the grid command");
    if (cfg.suites.empty()) cfg.suites = {"all"};
  }
  validate(cfg);
  return cfg;
}

int cmd_run(const RunFlags& f, const std::map<std::string, std::string>& tol, bool grid) {
  const RunConfig cfg = build_config(f, tol, grid);
  const Report rep = run_verify(cfg, grid ? "grid" : "verify");
  write_text(f.out, to_json(rep));
  if (!f.csv.empty()) {
    std::ofstream c(f.csv, std::ios::binary);
    if (!c) throw ConfigError("cannot write " + f.csv);
    c << to_csv(rep);
  }
  // an override that names no residual is almost always a typo
  for (const auto& [name, v] : cfg.suite.tolerance) {
    bool used = false;
    for (const auto& s : rep.suites)
      for (const auto& r : s.residuals) used = used || r.name == name;
    if (!used) std::cerr << "warning: --tol-" << name << " matches no residual\n";
  }
  for (const auto& s : rep.suites)
    std::cerr << (s.pass() ? "PASS " : "FAIL ") << s.name << " (n=" << s.n << ", " << s.residuals.size()
              << " residuals)\n";
  return rep.pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::map<std::string, std::string> tol;
  try {
    tol = take_tolerances(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"numerical checks for the kappa-Poincare groupoid construction"};
  app.require_subcommand(1);

  int dn = 1;
  long long dseed = 7;
  std::string kind = "g", matrix, dout;
  bool identity = false;
  CLI::App* dec = app.add_subcommand("decompose", "print the BC, CB, CA and AC factorizations of one element");
  dec->add_option("--n", dn, "dimension n");
  dec->add_option("--seed", dseed, "seed of the random element");
  dec->add_option("--kind", kind, "random element from a, b, c or g = bc")->check(CLI::IsMember({"a", "b", "c", "g"}));
  dec->add_option("--matrix", matrix, "(n+2)^2 entries, row-major, comma or space separated");
  dec->add_flag("--identity", identity, "use the identity");
  dec->add_option("--out", dout, "write JSON here instead of stdout");

  RunFlags vf, gf;
  CLI::App* ver = app.add_subcommand("verify", "run verification suites and emit a JSON report");
  add_run_flags(ver, vf, false);
  CLI::App* grd = app.add_subcommand("grid", "n = 1 grid experiments: convolution, twist generator, measure");
  add_run_flags(grd, gf, true);

  // CLI11 wants argv order reversed when parsing a vector
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (dec->parsed()) {
      if (!tol.empty()) throw ConfigError("decompose takes no tolerances");
      if (dseed < 0) throw ConfigError("seed must be >= 0");
      return cmd_decompose(dn, static_cast<std::uint64_t>(dseed), kind, matrix, identity, dout);
    }
    if (ver->parsed()) return cmd_run(vf, tol, false);
    return cmd_run(gf, tol, true);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kExitConfig;
  }
}
