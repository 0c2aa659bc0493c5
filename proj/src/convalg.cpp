#include "kappa/convalg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "kappa/errors.hpp"

namespace kappa {

namespace {

using CMat = Eigen::MatrixXcd;

constexpr double kPi = std::numbers::pi;

// C^2 bump (1 - r^2)^3 on |r| < 1
double poly_bump(double r) {
  const double q = 1.0 - r * r;
  return q > 0 ? q * q * q : 0.0;
}

double smoothstep(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v * v * (3 - 2 * v);
}

// flat top on [lo, hi] with tapers of width d inside the interval
double plateau(double u, double lo, double hi, double d) {
  return smoothstep((u - lo) / d) * smoothstep((hi - u) / d);
}

Vec vec1(double y) { return Vec::Constant(1, y); }

void require_n1(const GroupoidPoint& g) {
  if (g.n() != 1) throw DimensionError("BC grid chart needs n = 1");
}

double wrap_angle(double th) {
  th = std::fmod(th + kPi, 2 * kPi);
  if (th < 0) th += 2 * kPi;
  return th - kPi;
}

// per-axis tau slices as matrices (x1 rows, x2 columns)
std::vector<CMat> slices(const GridFunction& f) {
  const int n0 = f.axes[0].size, n1 = f.axes[1].size, n2 = f.axes[2].size;
  std::vector<CMat> out(n0, CMat(n1, n2));
  for (int i = 0; i < n0; ++i)
    for (int a = 0; a < n1; ++a)
      for (int b = 0; b < n2; ++b) out[i](a, b) = f(i, a, b);
  return out;
}

void check_symmetric_log_axis(const Axis& ax) {
  if (std::abs(ax.lo + ax.hi) > 1e-12 * std::max(1.0, std::abs(ax.hi)))
    throw DomainError("log t axis must be symmetric about 0");
}

GridFunction convolve_gamma0(const GridFunction& f1, const GridFunction& f2) {
  if (!(f1.axes[0] == f2.axes[0]) || !(f1.axes[2] == f2.axes[1]))
    throw DomainError("grid mismatch in convolution");
  check_symmetric_log_axis(f1.axes[0]);
  const int N = f1.axes[0].size;
  const double w = f1.axes[0].step() * f1.axes[2].step();
  const auto F1 = slices(f1);
  const auto F2 = slices(f2);
  // t/s falls on a node for odd N and halfway between two for even N
  const bool even = N % 2 == 0;
  const int shift = even ? N / 2 - 1 : (N - 1) / 2;
  const CMat zero = CMat::Zero(f2.axes[1].size, f2.axes[2].size);
  auto at = [&](int k) -> const CMat& { return (k >= 0 && k < N) ? F2[k] : zero; };
  std::vector<CMat> G(2 * N + 1, zero);
  for (int m = -N; m <= N; ++m) G[m + N] = even ? CMat(0.5 * (at(m) + at(m + 1))) : at(m);

  GridFunction out = GridFunction::zeros(Chart::Gamma0, {f1.axes[0], f1.axes[1], f2.axes[2]});
  for (int i = 0; i < N; ++i) {
    CMat acc = CMat::Zero(f1.axes[1].size, f2.axes[2].size);
    for (int j = 0; j < N; ++j) {
      const int k = i - j + shift;
      if (k < -N || k > N) continue;
      acc.noalias() += F1[j] * G[k + N];
    }
    acc *= w;
    for (int a = 0; a < acc.rows(); ++a)
      for (int b = 0; b < acc.cols(); ++b) out(i, a, b) = acc(a, b);
  }
  return out;
}

GridFunction convolve_bc(const GridFunction& f1, const GridFunction& f2) {
  if (!f1.same_grid(f2)) throw DomainError("grid mismatch in convolution");
  const auto& ax = f1.axes;
  const int n0 = ax[0].size, n1 = ax[1].size, n2 = ax[2].size;
  const double h0 = ax[0].step(), h1 = ax[1].step(), h2 = ax[2].step();
  GridFunction out = GridFunction::zeros(Chart::BC, ax);
  // log s offsets depend only on a - j
  std::vector<int> s_lo(2 * n1 - 1);
  std::vector<double> s_fr(2 * n1 - 1), s_exp(2 * n1 - 1);
  for (int d = -(n1 - 1); d <= n1 - 1; ++d) {
    const double ds = d * h1;
    const double p = (ds - ax[1].lo) / h1 - 0.5;
    const double fl = std::floor(p);
    s_lo[d + n1 - 1] = static_cast<int>(fl);
    s_fr[d + n1 - 1] = p - fl;
    s_exp[d + n1 - 1] = std::exp(ds);
  }
  const Cplx* src = f2.values.data();
  for (int i = 0; i < n0; ++i) {
    const GroupoidPoint gi = bc_point(ax[0].node(i), 0.0, 0.0);
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k) {
        const Cplx v1 = f1(i, j, k);
        if (v1 == Cplx(0.0)) continue;
        const double yk = ax[2].node(k);
        const BParam br = b_right(gi.b, CParam{std::exp(ax[1].node(j)), vec1(yk)});
        const double pt = (wrap_angle(std::atan2(br.w(0), br.alpha)) - ax[0].lo) / h0 - 0.5;
        const double ft = std::floor(pt);
        const int t0 = static_cast<int>(ft);
        const double wt[2] = {1 - (pt - ft), pt - ft};
        const int ti[2] = {((t0 % n0) + n0) % n0, (((t0 + 1) % n0) + n0) % n0};
        for (int a = 0; a < n1; ++a) {
          const int d = a - j + n1 - 1;
          const double ws[2] = {1 - s_fr[d], s_fr[d]};
          // c^{-1} c_g = (s_g/s, y_g - (s_g/s) y): a fixed shift in y for every y_g
          const double py = -s_exp[d] * yk / h2;
          const double fy = std::floor(py);
          const int dy = static_cast<int>(fy);
          const double wy[2] = {1 - (py - fy), py - fy};
          Cplx* dst = &out(i, a, 0);
          for (int ct = 0; ct < 2; ++ct)
            for (int cs = 0; cs < 2; ++cs) {
              const int m = s_lo[d] + cs;
              if (m < 0 || m >= n1) continue;
              const double wts = wt[ct] * ws[cs];
              if (wts == 0) continue;
              const Cplx* row = src + f2.index(ti[ct], m, 0);
              for (int cy = 0; cy < 2; ++cy) {
                const Cplx coef = v1 * (wts * wy[cy]);
                if (coef == Cplx(0.0)) continue;
                const int off = dy + cy;
                const int b0 = std::max(0, -off), b1 = std::min(n2, n2 - off);
                // spelled out to stay off the checked complex multiply
                const double cr = coef.real(), ci = coef.imag();
                double* o = reinterpret_cast<double*>(dst);
                const double* r = reinterpret_cast<const double*>(row + off);
                for (int b = b0; b < b1; ++b) {
                  o[2 * b] += cr * r[2 * b] - ci * r[2 * b + 1];
                  o[2 * b + 1] += cr * r[2 * b + 1] + ci * r[2 * b];
                }
              }
            }
        }
      }
  }
  const double w = h1 * h2;
  for (auto& v : out.values) v *= w;
  return out;
}

double sup_of(const GridFunction& f) {
  double m = 0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

// left-fibre integrals: sup over the first index of the integral over the other two
double left_fibre_sup(const GridFunction& f, int fixed_axis) {
  const auto& ax = f.axes;
  double best = 0;
  std::vector<double> acc(ax[fixed_axis].size, 0.0);
  for (int i = 0; i < ax[0].size; ++i)
    for (int j = 0; j < ax[1].size; ++j)
      for (int k = 0; k < ax[2].size; ++k) {
        const int idx[3] = {i, j, k};
        acc[idx[fixed_axis]] += std::abs(f(i, j, k));
      }
  double w = 1;
  for (int a = 0; a < 3; ++a)
    if (a != fixed_axis) w *= ax[a].step();
  for (double v : acc) best = std::max(best, v * w);
  return best;
}

}  // namespace

// ---- Haar ----

double HaarC::left(const CParam& c) const { return 1.0 / c.s; }
double HaarC::right(const CParam& c) const { return std::pow(c.s, -(n + 1)); }
double HaarC::modular(const CParam& c) const { return std::pow(c.s, -n); }

Residuals haar_invariance_check(int n, int samples, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const HaarC haar{n};
  auto draw = [&] {
    CParam c{std::exp(u(rng)), Vec(n)};
    for (int k = 0; k < n; ++k) c.y(k) = u(rng);
    return c;
  };
  auto phi = [n](const CParam& c) {
    double r = std::log(c.s) * std::log(c.s);
    for (int k = 0; k < n; ++k) r += c.y(k) * c.y(k);
    return std::exp(-r);
  };
  // Jacobian determinant of a map of C in (s, y) coordinates, by central differences
  auto jac = [n](const std::function<CParam(const CParam&)>& map, const CParam& c) {
    Mat J(n + 1, n + 1);
    const double h = 1e-6;
    for (int col = 0; col <= n; ++col) {
      CParam p = c, m = c;
      if (col == 0) {
        p.s += h * c.s;
        m.s -= h * c.s;
      } else {
        p.y(col - 1) += h;
        m.y(col - 1) -= h;
      }
      const double step = col == 0 ? 2 * h * c.s : 2 * h;
      const CParam fp = map(p), fm = map(m);
      J(0, col) = (fp.s - fm.s) / step;
      for (int k = 0; k < n; ++k) J(k + 1, col) = (fp.y(k) - fm.y(k)) / step;
    }
    return std::abs(J.determinant());
  };
  const CParam shift = draw();
  const std::function<CParam(const CParam&)> lmap = [&](const CParam& c) { return c_mul(shift, c); };
  const std::function<CParam(const CParam&)> rmap = [&](const CParam& c) { return c_mul(c, shift); };
  // proposal is uniform in (log s, y), i.e. density proportional to 1/s in (s, y)
  double l_direct = 0, l_moved = 0, r_direct = 0, r_moved = 0;
  for (int i = 0; i < samples; ++i) {
    const CParam c = draw();
    const double inv_q = c.s;
    const CParam lc = lmap(c), rc = rmap(c);
    l_direct += phi(lc) * haar.left(c) * inv_q;
    l_moved += phi(lc) * haar.left(lc) * jac(lmap, c) * inv_q;
    r_direct += phi(rc) * haar.right(c) * inv_q;
    r_moved += phi(rc) * haar.right(rc) * jac(rmap, c) * inv_q;
  }
  Residual left("haar_left_invariance", 1e-3), right("haar_right_invariance", 1e-3);
  left.add(std::abs(l_direct - l_moved) / std::abs(l_direct));
  right.add(std::abs(r_direct - r_moved) / std::abs(r_direct));
  left.samples = right.samples = samples;
  return {left, right};
}

// ---- grid functions ----

GridFunction GridFunction::zeros(Chart chart, const std::array<Axis, 3>& axes) {
  for (const auto& a : axes)
    if (a.size <= 0 || !(a.hi > a.lo)) throw DomainError("invalid grid axis");
  GridFunction f;
  f.chart = chart;
  f.axes = axes;
  f.values.assign(static_cast<std::size_t>(axes[0].size) * axes[1].size * axes[2].size, Cplx(0.0));
  return f;
}

double GridFunction::sup() const { return sup_of(*this); }

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  if (!a.same_grid(b)) throw DomainError("grid mismatch");
  GridFunction out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
  return out;
}

namespace {

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

double get_f64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("truncated grid file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_binary(const GridFunction& f, std::ostream& os) {
  put_f64(os, static_cast<double>(f.chart));
  for (const auto& a : f.axes) put_f64(os, a.size);
  for (const auto& a : f.axes) put_f64(os, a.step());
  for (const auto& a : f.axes) {
    put_f64(os, a.lo);
    put_f64(os, a.hi);
  }
  for (const auto& v : f.values) {
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
}

GridFunction read_binary(std::istream& is) {
  const double chart = get_f64(is);
  if (chart != 0.0 && chart != 1.0) throw std::runtime_error("unknown chart id in grid file");
  std::array<Axis, 3> axes;
  double steps[3];
  for (auto& a : axes) {
    const double d = get_f64(is);
    if (!(d >= 1 && d < 1e7) || d != std::floor(d)) throw std::runtime_error("bad grid size in grid file");
    a.size = static_cast<int>(d);
  }
  for (double& h : steps) h = get_f64(is);
  for (auto& a : axes) {
    a.lo = get_f64(is);
    a.hi = get_f64(is);
  }
  for (int i = 0; i < 3; ++i)
    if (std::abs(axes[i].step() - steps[i]) > 1e-12 * std::abs(steps[i]))
      throw std::runtime_error("grid step does not match bounds");
  GridFunction f = GridFunction::zeros(static_cast<Chart>(static_cast<int>(chart)), axes);
  for (auto& v : f.values) {
    const double re = get_f64(is);
    v = Cplx(re, get_f64(is));
  }
  return f;
}

void write_csv(const GridFunction& f, std::ostream& os) {
  os << "coord0,coord1,coord2,re,im\n";
  os.precision(17);
  for (int i = 0; i < f.axes[0].size; ++i)
    for (int j = 0; j < f.axes[1].size; ++j)
      for (int k = 0; k < f.axes[2].size; ++k) {
        const Cplx v = f(i, j, k);
        os << f.axes[0].node(i) << ',' << f.axes[1].node(j) << ',' << f.axes[2].node(k) << ',' << v.real() << ','
           << v.imag() << '\n';
      }
}

// ---- Gamma0 ----

GridFunction sample_gamma0(const std::function<Cplx(double, double, double)>& f, const std::array<Axis, 3>& axes) {
  GridFunction g = GridFunction::zeros(Chart::Gamma0, axes);
  for (int i = 0; i < axes[0].size; ++i)
    for (int j = 0; j < axes[1].size; ++j)
      for (int k = 0; k < axes[2].size; ++k) g(i, j, k) = f(axes[0].node(i), axes[1].node(j), axes[2].node(k));
  return g;
}

double Gamma0Box::bound(double sup) const { return sup * nu() * std::sqrt(mu_n() * mu_r()); }

double pi_norm_estimate(const GridFunction& f, int pad, int max_iter, double rtol) {
  if (f.chart != Chart::Gamma0) throw DomainError("pi needs the Gamma0 chart");
  const int N = f.axes[0].size;
  const int d1 = f.axes[1].size, d2 = f.axes[2].size;
  const double w = f.axes[0].step() * f.axes[2].step();
  const auto F = slices(f);
  const int P = std::max(1, pad) * N;  // psi samples in log t
  const int Q = P + N - 1;             // output samples
  auto apply = [&](const CMat& psi) {
    CMat out = CMat::Zero(d1, Q);
    for (int j = 0; j < N; ++j) out.middleCols(j, P).noalias() += F[j] * psi;
    return CMat(w * out);
  };
  auto apply_adj = [&](const CMat& phi) {
    CMat out = CMat::Zero(d2, P);
    for (int j = 0; j < N; ++j) out.noalias() += F[j].adjoint() * phi.middleCols(j, P);
    return CMat(w * out);
  };
  // the output lives on the x1 grid and the input on the x2 grid
  const double scale = std::sqrt(f.axes[1].step() / f.axes[2].step());
  // deterministic start with every mode present
  CMat v(d2, P);
  for (int a = 0; a < d2; ++a)
    for (int p = 0; p < P; ++p) v(a, p) = Cplx(1.0 + 0.1 * std::sin(1.7 * a + 0.3 * p), 0.05 * std::cos(0.9 * a + p));
  v /= v.norm();
  double est = 0;
  for (int it = 0; it < max_iter; ++it) {
    const CMat av = apply(v);
    const double next = av.norm();
    if (next == 0) return 0.0;
    CMat u = apply_adj(av);
    v = u / u.norm();
    if (std::abs(next - est) <= rtol * next) return scale * next;
    est = next;
  }
  return scale * est;
}

GridOperatorEstimate pi_norm_check(const GridFunction& f, const Gamma0Box& box, double slack) {
  const double sup = f.sup();
  const double h[3] = {f.axes[0].step(), f.axes[1].step(), f.axes[2].step()};
  for (int i = 0; i < f.axes[0].size; ++i)
    for (int j = 0; j < f.axes[1].size; ++j)
      for (int k = 0; k < f.axes[2].size; ++k) {
        const double t = f.axes[0].node(i), x1 = f.axes[1].node(j), x2 = f.axes[2].node(k);
        const bool inside = t >= box.tau_lo - h[0] / 2 && t <= box.tau_hi + h[0] / 2 && x1 >= box.x1_lo - h[1] / 2 &&
                            x1 <= box.x1_hi + h[1] / 2 && x2 >= box.x2_lo - h[2] / 2 && x2 <= box.x2_hi + h[2] / 2;
        if (!inside && std::abs(f(i, j, k)) > 1e-14 * std::max(sup, 1e-300))
          throw DomainError("function not supported in the declared box");
      }
  GridOperatorEstimate e;
  e.slack = slack;
  e.bound = box.bound(sup);
  e.estimate = sup == 0 ? 0.0 : pi_norm_estimate(f);
  return e;
}

GridFunction pi_apply(const GridFunction& f, const GridFunction& psi) {
  if (f.chart != Chart::Gamma0 || psi.chart != Chart::Gamma0) throw DomainError("pi needs the Gamma0 chart");
  return convolve_gamma0(f, psi);
}

double chi_eps(double x1, double eps) {
  const double r = (std::abs(x1) - 1.0) / (eps / 2);
  if (std::abs(r) >= 1) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double collar_measure(double eps, double lo, double hi) {
  auto overlap = [&](double a, double b) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); };
  return overlap(1 - eps / 2, 1 + eps / 2) + overlap(-1 - eps / 2, -1 + eps / 2);
}

ChiEpsResult chi_eps_experiment(const GridFunction& f, const Gamma0Box& box, const std::vector<double>& eps,
                                double slack) {
  ChiEpsResult r;
  r.monotone = true;
  r.within = true;
  const double sup = f.sup();
  for (double e : eps) {
    GridFunction g = f;
    for (int i = 0; i < f.axes[0].size; ++i)
      for (int j = 0; j < f.axes[1].size; ++j) {
        const double c = chi_eps(f.axes[1].node(j), e);
        for (int k = 0; k < f.axes[2].size; ++k) g(i, j, k) *= c;
      }
    const double est = pi_norm_estimate(g);
    const double bound = sup * box.nu() * std::sqrt(box.mu_r()) * std::sqrt(collar_measure(e, box.x1_lo, box.x1_hi));
    if (!r.estimate.empty() && !(est < r.estimate.back())) r.monotone = false;
    if (est > bound * (1 + slack)) r.within = false;
    r.eps.push_back(e);
    r.estimate.push_back(est);
    r.bound.push_back(bound);
  }
  return r;
}

// ---- both charts ----

GridFunction convolve(const GridFunction& f1, const GridFunction& f2) {
  if (f1.chart != f2.chart) throw DomainError("grid mismatch in convolution");
  return f1.chart == Chart::Gamma0 ? convolve_gamma0(f1, f2) : convolve_bc(f1, f2);
}

GridFunction star(const GridFunction& f) {
  if (f.chart == Chart::Gamma0) {
    // inverse of (t, x1, x2) is (1/t, x2, x1)
    check_symmetric_log_axis(f.axes[0]);
    const int N = f.axes[0].size;
    GridFunction out = GridFunction::zeros(Chart::Gamma0, {f.axes[0], f.axes[2], f.axes[1]});
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < f.axes[2].size; ++a)
        for (int b = 0; b < f.axes[1].size; ++b) out(i, a, b) = std::conj(f(N - 1 - i, b, a));
    return out;
  }
  GridFunction out = GridFunction::zeros(Chart::BC, f.axes);
  for (int i = 0; i < f.axes[0].size; ++i)
    for (int j = 0; j < f.axes[1].size; ++j)
      for (int k = 0; k < f.axes[2].size; ++k) {
        const GroupoidPoint g = bc_point(f.axes[0].node(i), f.axes[1].node(j), f.axes[2].node(k));
        out(i, j, k) = std::conj(interpolate(f, gb_inverse(g)));
      }
  return out;
}

double norm0(const GridFunction& f) {
  if (f.chart == Chart::Gamma0) return std::max(left_fibre_sup(f, 1), left_fibre_sup(f, 2));
  return std::max(left_fibre_sup(f, 0), left_fibre_sup(star(f), 0));
}

// ---- BC chart ----

GroupoidPoint bc_point(double theta, double sigma, double y) {
  Mat r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return {BParam::from_block(r), CParam{std::exp(sigma), vec1(y)}};
}

std::array<double, 3> bc_coords(const GroupoidPoint& g) {
  require_n1(g);
  return {std::atan2(g.b.w(0), g.b.alpha), std::log(g.c.s), g.c.y(0)};
}

GridFunction sample_bc(const PointFn<GroupoidPoint>& f, const std::array<Axis, 3>& axes) {
  GridFunction g = GridFunction::zeros(Chart::BC, axes);
  for (int i = 0; i < axes[0].size; ++i)
    for (int j = 0; j < axes[1].size; ++j)
      for (int k = 0; k < axes[2].size; ++k) g(i, j, k) = f(bc_point(axes[0].node(i), axes[1].node(j), axes[2].node(k)));
  return g;
}

Cplx interpolate(const GridFunction& f, double theta, double sigma, double y) {
  const auto& ax = f.axes;
  const double x[3] = {wrap_angle(theta), sigma, y};
  int lo[3];
  double fr[3];
  for (int a = 0; a < 3; ++a) {
    const double p = (x[a] - ax[a].lo) / ax[a].step() - 0.5;
    const double fl = std::floor(p);
    lo[a] = static_cast<int>(fl);
    fr[a] = p - fl;
  }
  const int n0 = ax[0].size;
  Cplx acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    int idx[3];
    double w = 1;
    bool ok = true;
    for (int a = 0; a < 3; ++a) {
      const int bit = (c >> a) & 1;
      idx[a] = lo[a] + bit;
      w *= bit ? fr[a] : 1 - fr[a];
      if (a == 0) {
        idx[0] = ((idx[0] % n0) + n0) % n0;  // periodic angle
      } else if (idx[a] < 0 || idx[a] >= ax[a].size) {
        ok = false;
      }
    }
    if (ok && w != 0) acc += w * f(idx[0], idx[1], idx[2]);
  }
  return acc;
}

Cplx interpolate(const GridFunction& f, const GroupoidPoint& g) {
  const auto x = bc_coords(g);
  return interpolate(f, x[0], x[1], x[2]);
}

PointFn<GroupoidPoint> as_function(const GridFunction& f) {
  if (f.chart != Chart::BC) throw DomainError("as_function needs the BC chart");
  return [f](const GroupoidPoint& g) { return interpolate(f, g); };
}

PointFn<GroupoidPoint> density_bisection(const CParam& c0, PointFn<GroupoidPoint> f) {
  const CParam inv = c_inv(c0);
  const double weight = 1.0 / std::sqrt(modular(embed_c(c0)).jC);
  return [inv, weight, f = std::move(f)](const GroupoidPoint& g) { return weight * f(bisection_apply(inv, g)); };
}

GridFunction density_bisection(const CParam& c0, const GridFunction& f) {
  if (f.chart != Chart::BC) throw DomainError("density_bisection on grids needs the BC chart");
  return sample_bc(density_bisection(c0, as_function(f)), f.axes);
}

// ---- quadrature with callables ----

std::vector<CParam> CQuadrature::nodes() const {
  const double hs = 2 * sigma_half / m, hy = 2 * y_half / m;
  std::size_t total = m;
  for (int k = 0; k < n; ++k) total *= m;
  std::vector<CParam> out;
  out.reserve(total);
  std::vector<int> idx(n + 1, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t r = t;
    for (int a = n; a >= 0; --a) {
      idx[a] = static_cast<int>(r % m);
      r /= m;
    }
    CParam c{std::exp(sigma_center - sigma_half + (idx[0] + 0.5) * hs), Vec(n)};
    for (int k = 0; k < n; ++k) c.y(k) = -y_half + (idx[k + 1] + 0.5) * hy;
    out.push_back(std::move(c));
  }
  return out;
}

double CQuadrature::weight() const { return (2 * sigma_half / m) * std::pow(2 * y_half / m, n); }

PointFn<GroupoidPoint> convolve_fn(PointFn<GroupoidPoint> f1, PointFn<GroupoidPoint> f2, const CQuadrature& q) {
  return [f1 = std::move(f1), f2 = std::move(f2), nodes = q.nodes(), w = q.weight()](const GroupoidPoint& g) {
    Cplx acc = 0.0;
    for (const auto& c : nodes) {
      const Cplx v1 = f1({g.b, c});
      if (v1 == Cplx(0.0)) continue;
      acc += v1 * f2({b_right(g.b, c), c_mul(c_inv(c), g.c)});
    }
    return w * acc;
  };
}

PointFn<GroupoidPoint> convolve_fn_right(PointFn<GroupoidPoint> f1, PointFn<GroupoidPoint> f2,
                                         const CQuadrature& q) {
  return [f1 = std::move(f1), f2 = std::move(f2), nodes = q.nodes(), w = q.weight(),
          n = q.n](const GroupoidPoint& g) {
    const HaarC haar{n};
    const BParam br = gb_right(g);
    Cplx acc = 0.0;
    for (const auto& c : nodes) {
      // right density against the uniform (log s, y) measure
      const double dens = haar.right(c) * c.s;
      const BCFactors cb = factor_bc(embed_c(c) * embed_b(br));
      const Cplx v2 = f2({cb.b, cb.c});
      if (v2 == Cplx(0.0)) continue;
      const double j = modular(embed_b(cb.b)).jC;
      acc += dens / j * f1({g.b, c_mul(g.c, c_inv(cb.c))}) * v2;
    }
    return w * acc;
  };
}

PairFn convolve_pair(PairFn h, PairFn g, const CQuadrature& q) {
  return [h = std::move(h), g = std::move(g), nodes = q.nodes(), w = q.weight()](const GroupoidPoint& g1,
                                                                                 const GroupoidPoint& g2) {
    Cplx acc = 0.0;
    for (const auto& c : nodes) {
      const GroupoidPoint r1{b_right(g1.b, c), c_mul(c_inv(c), g1.c)};
      for (const auto& d : nodes) {
        const GroupoidPoint r2{b_right(g2.b, d), c_mul(c_inv(d), g2.c)};
        const Cplx vg = g(r1, r2);
        if (vg == Cplx(0.0)) continue;
        acc += h({g1.b, c}, {g2.b, d}) * vg;
      }
    }
    return w * w * acc;
  };
}

PairFn right_multiply(PairFn h, PointFn<GroupoidPoint> g, int leg, const CQuadrature& q) {
  if (leg != 0 && leg != 1) throw DomainError("leg must be 0 or 1");
  return [h = std::move(h), g = std::move(g), leg, nodes = q.nodes(), w = q.weight()](const GroupoidPoint& g1,
                                                                                      const GroupoidPoint& g2) {
    const GroupoidPoint& p = leg == 0 ? g1 : g2;
    Cplx acc = 0.0;
    for (const auto& c : nodes) {
      const Cplx vg = g({b_right(p.b, c), c_mul(c_inv(c), p.c)});
      if (vg == Cplx(0.0)) continue;
      acc += (leg == 0 ? h({g1.b, c}, g2) : h(g1, {g2.b, c})) * vg;
    }
    return w * acc;
  };
}

PairFn tensor(PointFn<GroupoidPoint> f1, PointFn<GroupoidPoint> f2) {
  return [f1 = std::move(f1), f2 = std::move(f2)](const GroupoidPoint& g1, const GroupoidPoint& g2) {
    return f1(g1) * f2(g2);
  };
}

PairFn delta0_hat(PointFn<GroupoidPoint> f, PairFn F, const CQuadrature& q) {
  return [f = std::move(f), F = std::move(F), nodes = q.nodes(), w = q.weight()](const GroupoidPoint& g1,
                                                                                 const GroupoidPoint& g2) {
    const BParam b12 = b_mul(g1.b, g2.b);
    Cplx acc = 0.0;
    for (const auto& c : nodes) {
      const Cplx vf = f({b12, c});
      if (vf == Cplx(0.0)) continue;
      const CBFactors s2 = swap_bc_to_cb(g2.b, c);
      const CBFactors s12 = swap_bc_to_cb(b12, c);
      const double j = modular(embed_c(s2.c)).jC;
      const BCFactors p1 = factor_bc(embed_c(c_inv(s12.c)) * g1.matrix());
      const GroupoidPoint p2{s2.b, c_mul(c_inv(c), g2.c)};
      acc += vf / std::sqrt(j) * F({p1.b, p1.c}, p2);
    }
    return w * acc;
  };
}

// ---- experiments ----

namespace {

// smooth bumps for quadrature checks, C^2 ones for grid checks where only h^2 matters
struct BcTestFn {
  double a1, p1, a2, p2, sc, yc, rs, ry;
  Cplx phase;
  bool smooth = false;
  Cplx operator()(double th, double sg, double y) const {
    const double ang = 1.0 + a1 * std::cos(th - p1) + a2 * std::sin(2 * th - p2);
    const double ds = (sg - sc) / rs, dy = (y - yc) / ry;
    const double q = ds * ds + dy * dy;
    if (smooth) return q < 1 ? phase * ang * std::exp(1.0 - 1.0 / (1.0 - q)) : Cplx(0.0);
    return phase * ang * poly_bump(std::sqrt(q));
  }
};

BcTestFn random_bc_fn(Rng& rng, double rs, double ry, bool smooth = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BcTestFn f;
  f.smooth = smooth;
  f.a1 = 0.5 * u(rng);
  f.p1 = kPi * u(rng);
  f.a2 = 0.3 * u(rng);
  f.p2 = kPi * u(rng);
  f.sc = 0.05 * u(rng);
  f.yc = 0.05 * u(rng);
  f.rs = rs;
  f.ry = ry;
  f.phase = std::polar(1.0, kPi * u(rng));
  return f;
}

// supports sized so double products stay inside bc_axes
BcTestFn random_bc_fn(Rng& rng) { return random_bc_fn(rng, 0.35, 0.45); }

std::array<Axis, 3> bc_axes(int n) { return {Axis{n, -kPi, kPi}, Axis{n, -0.8, 0.8}, Axis{n, -1.15, 1.15}}; }

GridFunction sample_fn(const BcTestFn& f, const std::array<Axis, 3>& axes) {
  GridFunction g = GridFunction::zeros(Chart::BC, axes);
  for (int i = 0; i < axes[0].size; ++i)
    for (int j = 0; j < axes[1].size; ++j)
      for (int k = 0; k < axes[2].size; ++k) g(i, j, k) = f(axes[0].node(i), axes[1].node(j), axes[2].node(k));
  return g;
}

PointFn<GroupoidPoint> as_point_fn(const BcTestFn& f) {
  return [f](const GroupoidPoint& g) {
    const auto x = bc_coords(g);
    return f(x[0], x[1], x[2]);
  };
}

struct Gamma0TestFn {
  double k1, k2, k3;
  Cplx phase;
  Gamma0Box box;
  double amp;
  Cplx operator()(double t, double x1, double x2) const {
    const double d0 = 0.2 * box.nu(), d1 = 0.2 * box.mu_n(), d2 = 0.2 * box.mu_r();
    const double w = plateau(t, box.tau_lo, box.tau_hi, d0) * plateau(x1, box.x1_lo, box.x1_hi, d1) *
                     plateau(x2, box.x2_lo, box.x2_hi, d2);
    return amp * phase * std::polar(w, k1 * t + k2 * x1 + k3 * x2);
  }
};

Gamma0Box random_box(Rng& rng, const std::array<Axis, 3>& ax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](const Axis& a, double min_frac) {
    const double L = a.hi - a.lo;
    const double len = L * (min_frac + (0.85 - min_frac) * u(rng));
    const double lo = a.lo + 0.05 * L + (0.9 * L - len) * u(rng);
    return std::pair{lo, lo + len};
  };
  const auto [t0, t1] = pick(ax[0], 0.2);
  const auto [a0, a1] = pick(ax[1], 0.2);
  const auto [b0, b1] = pick(ax[2], 0.2);
  return {t0, t1, a0, a1, b0, b1};
}

Gamma0TestFn random_gamma0_fn(Rng& rng, const Gamma0Box& box, double max_freq) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {max_freq * u(rng), max_freq * u(rng), max_freq * u(rng), std::polar(1.0, kPi * u(rng)), box,
          1.0 + 0.5 * u(rng)};
}

std::array<Axis, 3> gamma0_axes(int n) { return {Axis{n, -2.0, 2.0}, Axis{n, 0.0, 2.0}, Axis{n, 0.0, 2.0}}; }

double rel_sup(const GridFunction& a, const GridFunction& b) {
  return (a - b).sup() / std::max(a.sup(), 1e-300);
}

}  // namespace

RefinementResult associativity_refinement(const std::vector<int>& grids, std::uint64_t seed) {
  Rng rng(seed);
  // box holds the double products, which is all either side of the identity needs
  const BcTestFn f1 = random_bc_fn(rng), f2 = random_bc_fn(rng), f3 = random_bc_fn(rng);
  RefinementResult out;
  out.grids = grids;
  for (int n : grids) {
    const auto ax = bc_axes(n);
    const GridFunction g1 = sample_fn(f1, ax), g2 = sample_fn(f2, ax), g3 = sample_fn(f3, ax);
    const GridFunction lhs = convolve(convolve(g1, g2), g3);
    const GridFunction rhs = convolve(g1, convolve(g2, g3));
    out.residuals.push_back(rel_sup(lhs, rhs));
  }
  // least-squares slope of log residual against log grid size
  const std::size_t m = grids.size();
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = std::log(static_cast<double>(grids[i])), y = std::log(out.residuals[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.ratio_per_halving = std::pow(2.0, out.order);
  }
  return out;
}

Residual pi_bound_check(int count, int grid, std::uint64_t seed, double slack) {
  Rng rng(seed);
  const auto ax = gamma0_axes(grid);
  Residual r("pi_bound_ratio", 1.0 + slack);
  for (int i = 0; i < count; ++i) {
    const Gamma0Box box = random_box(rng, ax);
    // every third function is non-oscillating, which is where the bound is nearly sharp
    const Gamma0TestFn fn = random_gamma0_fn(rng, box, i % 3 == 0 ? 0.0 : 3.0);
    const GridFunction f = sample_gamma0(fn, ax);
    const GridOperatorEstimate e = pi_norm_check(f, box, slack);
    r.add(e.estimate / e.bound);
  }
  return r;
}

Residuals convalg_checks(const ConvalgConfig& cfg) {
  Residuals out;
  Rng rng(cfg.seed + 11);
  append(out, haar_invariance_check(1, cfg.quick ? 10000 : cfg.haar_samples, cfg.seed + 12));

  // Gamma0 chart
  {
    const int n = cfg.grid;
    const auto ax = gamma0_axes(n);
    Residual inv("gamma0_star_involution", 1e-14), anti("gamma0_star_antimultiplicative", 1e-12),
        assoc("gamma0_associativity", 1e-12), sub("gamma0_norm0_submultiplicative", 1.05),
        pin("gamma0_pi_le_norm0", 1.05), zero("gamma0_zero_convolution", 0.0), box1("norm0_box_constant", 1.05);
    for (int s = 0; s < (cfg.quick ? 2 : 5); ++s) {
      // supports kept in the middle half of log t so triple products stay on the grid
      Gamma0Box b1 = random_box(rng, ax), b2 = random_box(rng, ax), b3 = random_box(rng, ax);
      for (auto* b : {&b1, &b2, &b3}) {
        b->tau_lo = -0.6;
        b->tau_hi = 0.6;
      }
      const GridFunction f1 = sample_gamma0(random_gamma0_fn(rng, b1, 2.0), ax);
      const GridFunction f2 = sample_gamma0(random_gamma0_fn(rng, b2, 2.0), ax);
      const GridFunction f3 = sample_gamma0(random_gamma0_fn(rng, b3, 2.0), ax);
      inv.add(rel_sup(star(star(f1)), f1));
      const GridFunction p = convolve(f1, f2);
      anti.add(rel_sup(star(p), convolve(star(f2), star(f1))));
      assoc.add(rel_sup(convolve(p, f3), convolve(f1, convolve(f2, f3))));
      sub.add(norm0(p) / (norm0(f1) * norm0(f2)));
      pin.add(pi_norm_estimate(f1) / norm0(f1));
      zero.add(convolve(f1, GridFunction::zeros(Chart::Gamma0, ax)).sup());
      // sup 1 and nu(M) = 1
      Gamma0Box unit = b1;
      unit.tau_lo = -0.5;
      unit.tau_hi = 0.5;
      GridFunction g = sample_gamma0(random_gamma0_fn(rng, unit, 2.0), ax);
      const double sg = g.sup();
      for (auto& v : g.values) v /= sg;
      box1.add(norm0(g) / (unit.nu() * std::max(unit.mu_n(), unit.mu_r())));
    }
    for (auto* r : {&inv, &anti, &assoc, &sub, &pin, &zero, &box1}) out.push_back(*r);
  }

  // chi_eps collar sequence
  {
    const std::array<Axis, 3> ax{Axis{16, -1.5, 1.5}, Axis{cfg.quick ? 64 : 128, 0.5, 1.5}, Axis{16, 0.0, 1.0}};
    const Gamma0Box box{-1.0, 1.0, 0.6, 1.4, 0.2, 0.8};
    const GridFunction f = sample_gamma0(
        [&](double t, double x1, double x2) {
          return Cplx(plateau(t, box.tau_lo, box.tau_hi, 0.3) * plateau(x1, box.x1_lo, box.x1_hi, 0.1) *
                      plateau(x2, box.x2_lo, box.x2_hi, 0.1) * (1.0 + 0.2 * std::cos(3 * x2)));
        },
        ax);
    const ChiEpsResult chi = chi_eps_experiment(f, box, {0.4, 0.2, 0.1, 0.05});
    Residual mono("chi_eps_monotone_ratio", 1.0 - 1e-9), within("chi_eps_bound_ratio", 1.05);
    for (std::size_t i = 0; i < chi.eps.size(); ++i) {
      within.add(chi.estimate[i] / chi.bound[i]);
      if (i > 0) mono.add(chi.estimate[i] / chi.estimate[i - 1]);
    }
    out.push_back(mono);
    out.push_back(within);
  }

  // BC chart grids
  {
    const int n = cfg.grid;
    const auto ax = bc_axes(n);
    // interpolation tolerance: square of the coarsest step
    double hmax = 0;
    for (const auto& a : ax) hmax = std::max(hmax, a.step());
    const double h2 = hmax * hmax;
    Residual inv("bc_star_involution", h2), anti("bc_star_antimultiplicative", h2),
        sub("bc_norm0_submultiplicative", 1.05), quad("bc_grid_matches_quadrature", h2),
        law("bisection_action_group_law_grid", h2), unit("bisection_action_unit_grid", 1e-12);
    const BcTestFn t1 = random_bc_fn(rng), t2 = random_bc_fn(rng);
    const GridFunction f1 = sample_fn(t1, ax), f2 = sample_fn(t2, ax);
    inv.add(rel_sup(star(star(f1)), f1));
    const GridFunction p = convolve(f1, f2);
    anti.add(rel_sup(star(p), convolve(star(f2), star(f1))));
    sub.add(norm0(p) / (norm0(f1) * norm0(f2)));
    // grid convolution against the callable quadrature at a few nodes
    const CQuadrature q{1, 48, 1.0, 1.0, 0.0};
    const auto pf = convolve_fn(as_point_fn(t1), as_point_fn(t2), q);
    for (int s = 0; s < 6; ++s) {
      const int i = (3 * s + 1) % n, j = n / 2 - 1 + s % 2, k = n / 2 - 1 + (s / 2) % 2;
      quad.add(std::abs(p(i, j, k) - pf(bc_point(ax[0].node(i), ax[1].node(j), ax[2].node(k)))) / p.sup());
    }
    const CParam c0{std::exp(0.15), vec1(0.1)}, c1{std::exp(-0.1), vec1(-0.12)};
    law.add(rel_sup(density_bisection(c1, density_bisection(c0, f1)), density_bisection(c_mul(c1, c0), f1)));
    unit.add(rel_sup(density_bisection(CParam::identity(1), f1), f1));
    for (auto* r : {&inv, &anti, &sub, &quad, &law, &unit}) out.push_back(*r);
  }

  // callables: both forms of the product, delta sequences, the coproduct lift, the bisection action
  {
    // quick mode halves the C quadrature, which costs about two digits
    const double loose = cfg.quick ? 100.0 : 1.0;
    Residual forms("convolution_left_right_forms", 1e-6 * loose), seq("delta_sequence_unit", 1e-4),
        seq_ratio("delta_sequence_order", 1.0), mult("coproduct_lift_multiplier_limit", 1e-4),
        mod("coproduct_lift_module_property", 1e-4 * loose), law("bisection_action_group_law", 1e-12),
        gen("bisection_action_generator", 1e-6, 1e-5), zero("coproduct_lift_zero", 0.0);
    const BcTestFn a = random_bc_fn(rng, 0.5, 0.5, true), b = random_bc_fn(rng, 0.5, 0.5, true);
    const auto fa = as_point_fn(a), fb = as_point_fn(b);
    const CQuadrature wide{1, cfg.quick ? 64 : 128, 1.2, 1.2, 0.0};
    const auto first = convolve_fn(fa, fb, wide), second = convolve_fn_right(fa, fb, wide);
    Rng prng(cfg.seed + 13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 5; ++s) {
      const GroupoidPoint g = bc_point(kPi * u(prng), 0.2 * u(prng), 0.2 * u(prng));
      const Cplx v1 = first(g), v2 = second(g);
      forms.add(std::abs(v1 - v2) / std::max(std::abs(v1), 1e-2));
    }

    // normalized Gaussian in (log s, y) shrinking to the unit
    auto bump = [](double width) {
      return [width](const GroupoidPoint& g) {
        const double sg = std::log(g.c.s), y = g.c.y(0);
        return Cplx(std::exp(-(sg * sg + y * y) / (2 * width * width)) / (2 * kPi * width * width));
      };
    };
    auto shrinking = [](double width) { return CQuadrature{1, 24, 6 * width, 6 * width, 0.0}; };
    const PointFn<GroupoidPoint> m = [](const GroupoidPoint& g) { return Cplx(std::cos(g.b.alpha) + 0.3 * g.b.w(0)); };
    for (int s = 0; s < 3; ++s) {
      const GroupoidPoint g = bc_point(kPi * u(prng), 0.2 * u(prng), 0.2 * u(prng));
      const GroupoidPoint g2 = bc_point(kPi * u(prng), 0.2 * u(prng), 0.2 * u(prng));
      const double widths[3] = {0.02, 0.01, 0.005};
      double err[3];
      Cplx val[3], mval[3];
      const Cplx target = fb(g);
      // a multiplier acts through the product of the base points
      const Cplx mtarget = m({b_mul(g.b, g2.b), CParam::identity(1)}) * fa(g) * fb(g2);
      for (int w = 0; w < 3; ++w) {
        const auto bw = bump(widths[w]);
        val[w] = convolve_fn(bw, fb, shrinking(widths[w]))(g);
        err[w] = std::abs(val[w] - target);
        const PointFn<GroupoidPoint> fm = [m, bw](const GroupoidPoint& p) { return m(p) * bw(p); };
        mval[w] = delta0_hat(fm, tensor(fa, fb), shrinking(widths[w]))(g, g2);
      }
      seq.add(std::abs((4.0 * val[2] - val[1]) / 3.0 - target) / std::max(std::abs(target), 1e-2));
      seq_ratio.add(std::abs(err[1] / err[2] - 4.0));
      mult.add(std::abs((4.0 * mval[2] - mval[1]) / 3.0 - mtarget) / std::max(std::abs(mtarget), 1e-2));
    }

    // right multiplication in either leg commutes with the coproduct lift
    {
      const CQuadrature q{1, cfg.quick ? 32 : 48, 1.2, 1.2, 0.0};
      const auto f = as_point_fn(random_bc_fn(rng, 0.6, 0.6, true));
      const auto G = as_point_fn(random_bc_fn(rng, 0.5, 0.5, true));
      const PairFn F = tensor(fa, fb);
      for (int leg = 0; leg < 2; ++leg) {
        const PairFn lhs = right_multiply(delta0_hat(f, F, q), G, leg, q);
        const PairFn rhs = delta0_hat(f, right_multiply(F, G, leg, q), q);
        const GroupoidPoint g1 = bc_point(kPi * u(prng), 0.05 * u(prng), 0.05 * u(prng));
        const GroupoidPoint g2 = bc_point(kPi * u(prng), 0.05 * u(prng), 0.05 * u(prng));
        const Cplx l = lhs(g1, g2), r = rhs(g1, g2);
        mod.add(std::abs(l - r) / std::max(std::abs(l), 1e-2));
      }
      zero.add(std::abs(delta0_hat([](const GroupoidPoint&) { return Cplx(0.0); }, F, q)(
          bc_point(0.3, 0.0, 0.0), bc_point(-0.2, 0.1, 0.0))));
    }

    // bisection action: group law and generator limit, exact callables
    for (int s = 0; s < 5; ++s) {
      const GroupoidPoint g = bc_point(kPi * u(prng), 0.3 * u(prng), 0.3 * u(prng));
      const CParam c0{std::exp(0.5 * u(prng)), vec1(0.5 * u(prng))}, c1{std::exp(0.5 * u(prng)), vec1(0.5 * u(prng))};
      const Cplx l = density_bisection(c1, density_bisection(c0, fa))(g);
      const Cplx r = density_bisection(c_mul(c1, c0), fa)(g);
      law.add(std::abs(l - r));
      for (int k = 0; k < 2; ++k) {
        const Vec x = Vec::Unit(2, k);
        const double h = 1e-5;
        auto act = [&](double t) { return density_bisection(exp_c(from_c_coords(t * x)), fa)(g); };
        const Cplx lhs = (act(h) - act(-h)) / (2 * h);
        const Cplx xr = (fa(flow(x, h, g)) - fa(flow(x, -h, g))) / (2 * h);
        const Cplx rhs = -(xr + 0.5 * tr_ad_c(1, x) * fa(g));
        gen.add(std::abs(lhs - rhs));
      }
    }
    for (auto* r : {&forms, &seq, &seq_ratio, &mult, &mod, &law, &gen, &zero}) out.push_back(*r);
  }
  return out;
}

}  // namespace kappa
