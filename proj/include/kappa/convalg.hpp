#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kappa/relations.hpp"
#include "kappa/residual.hpp"

namespace kappa {

/// Haar densities on C against ds dy: left 1/s, right 1/s^{n+1}.
struct HaarC {
  int n;
  double left(const CParam& c) const;
  double right(const CParam& c) const;
  /// right/left, equal to j_C(c)
  double modular(const CParam& c) const;
};

/// Change-of-variables check of left and right invariance with shared samples.
Residuals haar_invariance_check(int n, int samples, std::uint64_t seed);

enum class Chart : int { Gamma0 = 0, BC = 1 };

/// Midpoint grid on [lo, hi].
struct Axis {
  int size = 0;
  double lo = 0.0;
  double hi = 1.0;
  double step() const { return (hi - lo) / size; }
  double node(int i) const { return lo + (i + 0.5) * step(); }
  bool operator==(const Axis& o) const { return size == o.size && lo == o.lo && hi == o.hi; }
};

/// Samples of a function on G_B (n = 1) in one of two charts.
/// Gamma0: (log t, x1, x2). BC: (rotation angle of b, log s, y), the angle periodic.
struct GridFunction {
  Chart chart = Chart::Gamma0;
  std::array<Axis, 3> axes;
  std::vector<Cplx> values;

  static GridFunction zeros(Chart chart, const std::array<Axis, 3>& axes);
  Cplx& operator()(int i, int j, int k) { return values[index(i, j, k)]; }
  const Cplx& operator()(int i, int j, int k) const { return values[index(i, j, k)]; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * axes[1].size + j) * axes[2].size + k;
  }
  double sup() const;
  bool same_grid(const GridFunction& o) const { return chart == o.chart && axes == o.axes; }
};

GridFunction operator-(const GridFunction& a, const GridFunction& b);

/// Little-endian f64 header (chart, sizes, steps, bounds) then (re, im) pairs row-major.
void write_binary(const GridFunction& f, std::ostream& os);
GridFunction read_binary(std::istream& is);
void write_csv(const GridFunction& f, std::ostream& os);

// ---- Gamma0 chart, n = 1 ----

GridFunction sample_gamma0(const std::function<Cplx(double, double, double)>& f, const std::array<Axis, 3>& axes);

/// Product box L x M x N x R; the log t interval is M.
struct Gamma0Box {
  double tau_lo, tau_hi;
  double x1_lo, x1_hi;
  double x2_lo, x2_hi;
  double nu() const { return tau_hi - tau_lo; }
  double mu_n() const { return x1_hi - x1_lo; }
  double mu_r() const { return x2_hi - x2_lo; }
  /// sup|f| nu(M) sqrt(mu(N) mu(R))
  double bound(double sup) const;
};

struct GridOperatorEstimate {
  double estimate = 0.0;
  double bound = 0.0;
  double slack = 0.05;
  int iterations = 0;
  bool within() const { return estimate <= bound * (1.0 + slack); }
};

/// Power-iteration estimate of the operator norm of pi(f). The x2 variable of
/// pi(f) psi is a spectator, so the reduced operator on psi(log t, y) is used,
/// with psi padded to `pad` times the log t extent.
double pi_norm_estimate(const GridFunction& f, int pad = 2, int max_iter = 400, double rtol = 1e-10);
/// Throws DomainError when f does not vanish outside the box.
GridOperatorEstimate pi_norm_check(const GridFunction& f, const Gamma0Box& box, double slack = 0.05);
GridFunction pi_apply(const GridFunction& f, const GridFunction& psi);

/// Smooth bump in x1 of total width eps around |x1| = 1, equal to 1 on the unit sphere.
double chi_eps(double x1, double eps);
/// Measure of the eps-collar inside [lo, hi].
double collar_measure(double eps, double lo, double hi);

struct ChiEpsResult {
  std::vector<double> eps;
  std::vector<double> estimate;
  std::vector<double> bound;
  bool monotone = false;
  bool within = false;
};
ChiEpsResult chi_eps_experiment(const GridFunction& f, const Gamma0Box& box, const std::vector<double>& eps,
                                double slack = 0.05);

// ---- both charts ----

/// Convolution on a common grid. Gamma0 uses the log t kernel; BC evaluates the
/// first integral of the product over the left fibre, interpolating the second factor.
GridFunction convolve(const GridFunction& f1, const GridFunction& f2);
GridFunction star(const GridFunction& f);
/// max of the sup of left and right fibre integrals
double norm0(const GridFunction& f);

// ---- BC chart, n = 1 ----

GroupoidPoint bc_point(double theta, double sigma, double y);
std::array<double, 3> bc_coords(const GroupoidPoint& g);
GridFunction sample_bc(const PointFn<GroupoidPoint>& f, const std::array<Axis, 3>& axes);
/// Trilinear, periodic in the angle, zero outside the (log s, y) box.
Cplx interpolate(const GridFunction& f, double theta, double sigma, double y);
Cplx interpolate(const GridFunction& f, const GroupoidPoint& g);
PointFn<GroupoidPoint> as_function(const GridFunction& f);

/// (B c0 f)(g) = f(B(c0)^{-1} g) j_C(c0)^{-1/2}
PointFn<GroupoidPoint> density_bisection(const CParam& c0, PointFn<GroupoidPoint> f);
GridFunction density_bisection(const CParam& c0, const GridFunction& f);

// ---- quadrature over C with callables, any n ----

/// Midpoint rule on (log s, y) in [-sigma_half, sigma_half] x [-y_half, y_half]^n,
/// shifted by a centre. The left Haar measure is uniform in these coordinates.
struct CQuadrature {
  int n = 1;
  int m = 16;
  double sigma_half = 2.0;
  double y_half = 2.0;
  double sigma_center = 0.0;
  std::vector<CParam> nodes() const;
  double weight() const;
};

using PairFn = std::function<Cplx(const GroupoidPoint&, const GroupoidPoint&)>;

/// First form: integral over the left fibre of f1(b_L(g)c) f2(c_L(b_L(g)c)^{-1} g).
PointFn<GroupoidPoint> convolve_fn(PointFn<GroupoidPoint> f1, PointFn<GroupoidPoint> f2, const CQuadrature& q);
/// Second form over the right fibre, with the j_C weight and the right density.
PointFn<GroupoidPoint> convolve_fn_right(PointFn<GroupoidPoint> f1, PointFn<GroupoidPoint> f2,
                                         const CQuadrature& q);
/// Convolution on G_B x G_B, first form in each leg.
PairFn convolve_pair(PairFn h, PairFn g, const CQuadrature& q);
/// Right multiplication by g in one leg (0 or 1) only.
PairFn right_multiply(PairFn h, PointFn<GroupoidPoint> g, int leg, const CQuadrature& q);
PairFn tensor(PointFn<GroupoidPoint> f1, PointFn<GroupoidPoint> f2);
/// The coproduct lift acting on functions on pairs.
PairFn delta0_hat(PointFn<GroupoidPoint> f, PairFn F, const CQuadrature& q);

struct ConvalgConfig {
  std::uint64_t seed = 1;
  int grid = 16;            // per axis
  int haar_samples = 100000;
  int bound_functions = 50;
  bool quick = false;       // coarse grids, fewer samples
};

struct RefinementResult {
  std::vector<int> grids;
  std::vector<double> residuals;  // sup of the associativity defect over sup of the product
  double order = 0.0;             // least-squares slope against log grid size
  double ratio_per_halving = 0.0;
};
/// Associativity defect of the BC-chart convolution under grid refinement.
/// The log t chart is no use here: its discrete convolution is exactly associative.
RefinementResult associativity_refinement(const std::vector<int>& grids, std::uint64_t seed);

/// Operator-norm bound on random boxed functions: worst estimate/bound ratio.
Residual pi_bound_check(int count, int grid, std::uint64_t seed, double slack = 0.05);

/// Everything except the refinement studies and the bound sweep.
Residuals convalg_checks(const ConvalgConfig& cfg);

}  // namespace kappa
