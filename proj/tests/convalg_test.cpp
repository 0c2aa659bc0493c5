#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kappa/convalg.hpp"
#include "kappa/errors.hpp"

using namespace kappa;

namespace {

constexpr double kPi = std::numbers::pi;

std::array<Axis, 3> g0_axes(int n) { return {Axis{n, -2.0, 2.0}, Axis{n, 0.0, 2.0}, Axis{n, 0.0, 2.0}}; }

double bump(double u, double lo, double hi) {
  const double r = (2 * u - lo - hi) / (hi - lo);
  return std::abs(r) < 1 ? std::exp(1 - 1 / (1 - r * r)) : 0.0;
}

GridFunction g0_bump(int n, double phase_freq = 0.0) {
  return sample_gamma0(
      [&](double t, double x1, double x2) {
        return std::polar(bump(t, -0.6, 0.6) * bump(x1, 0.3, 1.5) * bump(x2, 0.5, 1.7), phase_freq * (t + x1 - x2));
      },
      g0_axes(n));
}

PointFn<GroupoidPoint> bc_fn(double r, double phase) {
  return [r, phase](const GroupoidPoint& g) {
    const auto x = bc_coords(g);
    const double q = (x[1] * x[1] + x[2] * x[2]) / (r * r);
    return q < 1 ? std::polar((1 + 0.3 * std::cos(x[0] - phase)) * std::exp(1 - 1 / (1 - q)), phase) : Cplx(0.0);
  };
}

std::array<Axis, 3> bc_grid(int n) { return {Axis{n, -kPi, kPi}, Axis{n, -0.8, 0.8}, Axis{n, -1.15, 1.15}}; }

}  // namespace

TEST(Convalg, HaarDensities) {
  const HaarC h{2};
  const CParam c{2.0, Vec::Zero(2)};
  EXPECT_DOUBLE_EQ(h.left(c), 0.5);
  EXPECT_DOUBLE_EQ(h.right(c), 0.125);
  EXPECT_DOUBLE_EQ(h.modular(c), 0.25);
  EXPECT_NEAR(h.modular(c), modular(embed_c(c)).jC, 1e-12);
  for (int n : {1, 2, 3})
    for (const auto& r : haar_invariance_check(n, 2000, 5)) EXPECT_TRUE(r.pass) << r.name << " " << r.max_residual;
}

TEST(Convalg, BinaryAndCsvRoundTrip) {
  const GridFunction f = g0_bump(6, 1.3);
  std::stringstream ss;
  write_binary(f, ss);
  EXPECT_EQ(ss.str().size(), 8u * (13 + 2 * f.values.size()));
  const GridFunction g = read_binary(ss);
  ASSERT_TRUE(g.same_grid(f));
  for (std::size_t i = 0; i < f.values.size(); ++i) EXPECT_EQ(f.values[i], g.values[i]);
  std::stringstream bad("xx");
  EXPECT_THROW(read_binary(bad), std::runtime_error);
  std::stringstream csv;
  write_csv(f, csv);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "coord0,coord1,coord2,re,im");
}

TEST(Convalg, Gamma0Basics) {
  const GridFunction f = g0_bump(16, 0.7);
  const GridFunction zero = GridFunction::zeros(Chart::Gamma0, g0_axes(16));
  EXPECT_EQ(convolve(f, zero).sup(), 0.0);
  EXPECT_EQ((star(star(f)) - f).sup(), 0.0);
  const GridFunction g = g0_bump(16, -1.1);
  EXPECT_LT((star(convolve(f, g)) - convolve(star(g), star(f))).sup(), 1e-14);
  EXPECT_LE(norm0(convolve(f, g)), 1.05 * norm0(f) * norm0(g));
  EXPECT_LE(pi_norm_estimate(f), 1.05 * norm0(f));
  // the log t kernel is translation invariant, so the discrete product is exactly associative
  const GridFunction h = g0_bump(16, 0.4);
  const GridFunction l = convolve(convolve(f, g), h), r = convolve(f, convolve(g, h));
  EXPECT_LT((l - r).sup(), 1e-14 * l.sup());
  GridFunction odd = GridFunction::zeros(Chart::Gamma0, {Axis{16, -1.0, 2.0}, Axis{16, 0.0, 2.0}, Axis{16, 0.0, 2.0}});
  EXPECT_THROW(convolve(odd, odd), DomainError);
}

TEST(Convalg, PiNormSeparableOracle) {
  // kernel a(log t) u(x1) v(x2) with a >= 0: the norm is (int a) |u| |v|
  const auto ax = g0_axes(20);
  auto a = [](double t) { return bump(t, -0.8, 0.4); };
  auto u = [](double x) { return bump(x, 0.2, 1.6); };
  auto v = [](double x) { return x * bump(x, 0.4, 1.9); };
  const GridFunction f = sample_gamma0([&](double t, double x1, double x2) { return Cplx(a(t) * u(x1) * v(x2)); }, ax);
  double ia = 0, nu = 0, nv = 0;
  for (int i = 0; i < 20; ++i) {
    ia += a(ax[0].node(i)) * ax[0].step();
    nu += u(ax[1].node(i)) * u(ax[1].node(i)) * ax[1].step();
    nv += v(ax[2].node(i)) * v(ax[2].node(i)) * ax[2].step();
  }
  const double expect = ia * std::sqrt(nu * nv);
  const double est = pi_norm_estimate(f, 4, 1000, 1e-12);
  EXPECT_LE(est, expect * (1 + 1e-9));
  EXPECT_GT(est, 0.97 * expect);
}

TEST(Convalg, PiNormBoundExamples) {
  const auto ax = g0_axes(16);
  const Gamma0Box unit{0.0, 1.0, 0.5, 1.5, 0.6, 1.6};
  EXPECT_DOUBLE_EQ(unit.bound(1.0), 1.0);
  const GridOperatorEstimate z = pi_norm_check(GridFunction::zeros(Chart::Gamma0, ax), unit);
  EXPECT_EQ(z.estimate, 0.0);
  EXPECT_EQ(z.bound, 0.0);
  const GridFunction f = sample_gamma0(
      [&](double t, double x1, double x2) { return Cplx(bump(t, 0.0, 1.0) * bump(x1, 0.5, 1.5) * bump(x2, 0.6, 1.6)); },
      ax);
  GridFunction g = f;
  for (auto& v : g.values) v /= f.sup();
  const GridOperatorEstimate e = pi_norm_check(g, unit);
  EXPECT_TRUE(e.within());
  EXPECT_LE(e.estimate, 1.05);
  Gamma0Box wider = unit;
  wider.x2_hi += 0.3;
  EXPECT_GE(wider.bound(1.0), unit.bound(1.0));
  Gamma0Box narrow{0.0, 1.0, 0.9, 1.1, 0.6, 1.6};
  EXPECT_THROW(pi_norm_check(g, narrow), DomainError);
  const Residual r = pi_bound_check(10, 16, 3);
  EXPECT_TRUE(r.pass) << r.max_residual;
}

TEST(Convalg, Norm0BoxConstant) {
  // sup 1 on a box with nu = 1: both fibre integrals are at most nu times the box side
  const auto ax = g0_axes(16);
  const GridFunction f = sample_gamma0(
      [&](double t, double x1, double x2) { return Cplx(bump(t, -0.5, 0.5) * bump(x1, 0.2, 1.0) * bump(x2, 0.4, 1.8)); },
      ax);
  EXPECT_LE(norm0(f), 1.0 * std::max(0.8, 1.4));
  EXPECT_GT(norm0(f), 0.0);
}

TEST(Convalg, ChiEps) {
  EXPECT_DOUBLE_EQ(chi_eps(1.0, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(chi_eps(-1.0, 0.1), 1.0);
  EXPECT_EQ(chi_eps(1.06, 0.1), 0.0);
  EXPECT_GT(chi_eps(1.02, 0.1), chi_eps(1.02, 0.05));
  EXPECT_DOUBLE_EQ(collar_measure(0.2, 0.6, 1.4), 0.2);
  EXPECT_NEAR(collar_measure(0.2, 1.0, 2.0), 0.1, 1e-15);
  const std::array<Axis, 3> ax{Axis{16, -1.5, 1.5}, Axis{64, 0.5, 1.5}, Axis{16, 0.0, 1.0}};
  // vanishing near |x1| = 1
  const Gamma0Box box{-1.0, 1.0, 0.5, 0.9, 0.2, 0.8};
  const GridFunction far = sample_gamma0(
      [&](double t, double x1, double x2) { return Cplx(bump(t, -1, 1) * bump(x1, 0.5, 0.9) * bump(x2, 0.2, 0.8)); }, ax);
  const ChiEpsResult r = chi_eps_experiment(far, box, {0.1, 0.05});
  EXPECT_EQ(r.estimate[0], 0.0);
  EXPECT_EQ(r.estimate[1], 0.0);
}

TEST(Convalg, BcChartInterpolation) {
  const GroupoidPoint g = bc_point(0.7, -0.2, 0.4);
  const auto x = bc_coords(g);
  EXPECT_NEAR(x[0], 0.7, 1e-14);
  EXPECT_NEAR(x[1], -0.2, 1e-14);
  EXPECT_NEAR(x[2], 0.4, 1e-14);
  const auto ax = bc_grid(12);
  // exact for functions linear in (log s, y) away from the edges, periodic in the angle
  const GridFunction lin = sample_bc(
      [](const GroupoidPoint& p) {
        const auto c = bc_coords(p);
        return Cplx(1.0 + 0.3 * c[1] - 0.2 * c[2]);
      },
      ax);
  EXPECT_NEAR(std::abs(interpolate(lin, 2.0, 0.1, -0.3) - Cplx(1.0 + 0.03 + 0.06)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(interpolate(lin, 2.0 + 2 * kPi, 0.1, -0.3) - interpolate(lin, 2.0, 0.1, -0.3)), 0.0, 1e-13);
  EXPECT_EQ(interpolate(lin, 0.0, 5.0, 0.0), Cplx(0.0));
  const GridFunction f = sample_bc(bc_fn(0.5, 0.3), ax);
  EXPECT_LT((density_bisection(CParam::identity(1), f) - f).sup(), 1e-13);
}

TEST(Convalg, BcConvolutionAgainstQuadrature) {
  const auto f1 = bc_fn(0.4, 0.3), f2 = bc_fn(0.45, -1.0);
  const CQuadrature q{1, 96, 1.0, 1.0, 0.0};
  const auto exact = convolve_fn(f1, f2, q);
  double prev = 1e300;
  for (int n : {16, 32}) {
    const auto ax = bc_grid(n);
    const GridFunction p = convolve(sample_bc(f1, ax), sample_bc(f2, ax));
    double err = 0;
    for (int i = 0; i < n; i += 5)
      for (int j = n / 2 - 2; j < n / 2 + 2; ++j)
        for (int k = n / 2 - 2; k < n / 2 + 2; ++k)
          err = std::max(err, std::abs(p(i, j, k) - exact(bc_point(ax[0].node(i), ax[1].node(j), ax[2].node(k)))));
    EXPECT_LT(err, prev / 2.5) << n;
    prev = err;
  }
  const auto zero = GridFunction::zeros(Chart::BC, bc_grid(8));
  EXPECT_EQ(convolve(sample_bc(f1, bc_grid(8)), zero).sup(), 0.0);
  EXPECT_THROW(convolve(zero, GridFunction::zeros(Chart::BC, bc_grid(10))), DomainError);
}

TEST(Convalg, AssociativityRefinement) {
  const RefinementResult r = associativity_refinement({12, 24}, 4);
  ASSERT_EQ(r.residuals.size(), 2u);
  EXPECT_GT(r.residuals[0], r.residuals[1]);
  EXPECT_GT(r.ratio_per_halving, 2.0);
}

TEST(Convalg, ProductFormsAndLift) {
  const auto f1 = bc_fn(0.5, 0.3), f2 = bc_fn(0.5, -1.0);
  const CQuadrature q{1, 96, 1.2, 1.2, 0.0};
  const GroupoidPoint g = bc_point(-0.4, 0.1, -0.1);
  const Cplx a = convolve_fn(f1, f2, q)(g), b = convolve_fn_right(f1, f2, q)(g);
  EXPECT_LT(std::abs(a - b), 1e-6 * std::abs(a));
  const PairFn F = tensor(f1, f2);
  const CQuadrature coarse{1, 8, 1.2, 1.2, 0.0};
  EXPECT_EQ(delta0_hat([](const GroupoidPoint&) { return Cplx(0.0); }, F, coarse)(g, g), Cplx(0.0));
  EXPECT_THROW(right_multiply(F, f1, 2, coarse), DomainError);
}

TEST(Convalg, BisectionAction) {
  const auto f = bc_fn(0.6, 0.2);
  const GroupoidPoint g = bc_point(1.1, 0.2, -0.1);
  const CParam c0{1.3, Vec::Constant(1, 0.2)}, c1{0.8, Vec::Constant(1, -0.1)};
  EXPECT_NEAR(std::abs(density_bisection(c1, density_bisection(c0, f))(g) - density_bisection(c_mul(c1, c0), f)(g)),
              0.0, 1e-14);
  EXPECT_EQ(density_bisection(CParam::identity(1), f)(g), f(g));
}

TEST(Convalg, FullChecks) {
  for (const auto& r : convalg_checks(ConvalgConfig{}))
    EXPECT_TRUE(r.pass) << r.name << " " << r.max_residual << " tol " << r.tolerance;
}
