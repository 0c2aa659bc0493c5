#include "kappa/groupoid.hpp"

#include <cmath>
#include <string>
#include <tuple>

namespace kappa {

double b_distance(const BParam& x, const BParam& y) { return (x.block() - y.block()).cwiseAbs().maxCoeff(); }

double c_distance(const CParam& x, const CParam& y) {
  double d = std::abs(x.s - y.s);
  if (x.y.size()) d = std::max(d, (x.y - y.y).cwiseAbs().maxCoeff());
  return d;
}

double a_distance(const AParam& x, const AParam& y) {
  if (x.d != y.d) return INFINITY;
  return std::max((x.z - y.z).cwiseAbs().maxCoeff(), (x.U - y.U).cwiseAbs().maxCoeff());
}

GroupoidPoint gb_unit(const BParam& b) { return {b, CParam::identity(b.n())}; }

BParam gb_right(const GroupoidPoint& g) { return swap_bc_to_cb(g.b, g.c).b; }

std::pair<BParam, BParam> gb_ends(const GroupoidPoint& g) { return {g.b, gb_right(g)}; }

GroupoidPoint gb_compose(const GroupoidPoint& g1, const GroupoidPoint& g2, double tol) {
  if (g1.n() != g2.n()) throw DimensionError("compose of different n");
  const double gap = b_distance(gb_right(g1), g2.b);
  if (!(gap <= tol)) throw DomainError("points are not composable, end mismatch " + std::to_string(gap));
  return {g1.b, c_mul(g1.c, g2.c)};
}

GroupoidPoint gb_inverse(const GroupoidPoint& g) { return {gb_right(g), c_inv(g.c)}; }

GroupoidPoint bisection_apply(const CParam& c0, const GroupoidPoint& g) {
  return {swap_bc_to_cb(g.b, c_inv(c0)).b, c_mul(c0, g.c)};
}

bool in_gamma1(const BParam& b) { return std::abs(b.alpha - 1) < 1e-10 && b.u.norm() < 1e-10; }

CParam isotropy_element(const BParam& b, double s) {
  if (in_gamma1(b)) throw DomainError("isotropy curve is for alpha != 1");
  return {s, (s - 1) * b.w / (1 - b.alpha)};
}

Classification classify(const GroupoidPoint& g) {
  const auto [l, r] = gb_ends(g);
  Classification out;
  out.orbit = in_gamma1(g.b) ? Orbit::Gamma1 : Orbit::Gamma0;
  out.in_bprime = std::abs(l.alpha) >= kBPrimeGuard && std::abs(r.alpha) >= kBPrimeGuard;
  out.ends_equal = b_distance(l, r) <= 1e-9;
  out.isotropy_dim = out.orbit == Orbit::Gamma1 ? g.n() + 1 : 1;
  return out;
}

Mat reflection(const Vec& v) {
  const int n = static_cast<int>(v.size());
  const double q = v.squaredNorm();
  Mat r(n + 1, n + 1);
  r.topLeftCorner(n, n) = Mat::Identity(n, n) - 2 * v * v.transpose() / (1 + q);
  r.topRightCorner(n, 1) = 2 * v / (1 + q);
  r.bottomLeftCorner(1, n) = 2 * v.transpose() / (1 + q);
  r(n, n) = (q - 1) / (1 + q);
  return r;
}

BParam phi_chart(const Mat& K, const Vec& v) {
  const int n = static_cast<int>(v.size());
  if (K.rows() != n || K.cols() != n) throw DimensionError("K must be n x n");
  if ((K.transpose() * K - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10 || K.determinant() > 0)
    throw DomainError("K must be orthogonal with det -1");
  Mat k1 = Mat::Identity(n + 1, n + 1);
  k1.topLeftCorner(n, n) = K;
  return BParam::from_block(k1 * reflection(v));
}

std::pair<Mat, Vec> psi_chart(const BParam& b) {
  if (std::abs(1 - b.alpha) < kBPrimeGuard) throw DomainError("psi chart needs alpha != 1");
  return {b.Lambda - b.u * b.w.transpose() / (b.alpha - 1), b.w / (1 - b.alpha)};
}

Vec gamma00_action(const Vec& v, const CParam& c) { return c.s * v - c.y; }

Gamma00Swap gamma00_swap(const Mat& K, const Vec& v, const CParam& c) {
  const double s = c.s, q = v.squaredNorm();
  const Vec vr = gamma00_action(v, c);
  Gamma00Swap out;
  out.v_right = vr;
  out.ct.s = (1 + vr.squaredNorm()) / (s * (1 + q));
  out.ct.y = K * (c.y - 2 * v * (v.dot(c.y) + (s * s - c.y.squaredNorm() - 1) / (2 * s)) / (1 + q));
  return out;
}

std::pair<Vec, CParam> gamma00_split(double s, const Vec& x1, const Vec& x2) {
  if (!(s > 0)) throw DomainError("split needs s > 0");
  return {x1, CParam{s, s * x1 - x2}};
}

std::tuple<double, Vec, Vec> gamma00_unsplit(const Vec& v, const CParam& c) {
  return {c.s, v, gamma00_action(v, c)};
}

Gamma0Coord gamma0_coords(const GroupoidPoint& g) {
  if (in_gamma1(g.b)) throw DomainError("point lies in Gamma_1");
  auto [K, v] = psi_chart(g.b);
  auto [t, x1, x2] = gamma00_unsplit(v, g.c);
  return {K, t, x1, x2};
}

GroupoidPoint from_gamma0(const Gamma0Coord& x) {
  auto [v, c] = gamma00_split(x.t, x.x1, x.x2);
  return {phi_chart(x.K, v), c};
}

AGroupoidPoint ga_unit(const AParam& a) { return {a, CParam::identity(a.n())}; }

// a c = c_a b c with b = b_R(a); swapping b c in B keeps the B' end well conditioned,
// reading a_R off the raw matrix loses digits once the end is far out in A
AParam ga_right(const AGroupoidPoint& g) { return a_right(b_right(a_factor(g.a).b, g.c)); }

AGroupoidPoint ga_compose(const AGroupoidPoint& g1, const AGroupoidPoint& g2, double tol) {
  if (g1.n() != g2.n()) throw DimensionError("compose of different n");
  const double gap = a_distance(ga_right(g1), g2.a);
  if (!(gap <= tol)) throw DomainError("points are not composable, end mismatch " + std::to_string(gap));
  return {g1.a, c_mul(g1.c, g2.c)};
}

AGroupoidPoint ga_inverse(const AGroupoidPoint& g) { return {ga_right(g), c_inv(g.c)}; }

AGroupoidPoint ga_bisection_apply(const CParam& c0, const AGroupoidPoint& g) {
  return {a_right(b_right(a_factor(g.a).b, c_inv(c0))), c_mul(c0, g.c)};
}

GroupoidPoint gamma_a_to_b(const AGroupoidPoint& p) { return {a_factor(p.a).b, p.c}; }

AGroupoidPoint gamma_b_to_a(const GroupoidPoint& g) {
  if (std::abs(gb_right(g).alpha) < kBPrimeGuard) throw DomainError("right end not in B'");
  return {a_right(g.b), g.c};
}

BParam trans_action(const BParam& b, const CParam& c) { return swap_bc_to_cb(b, c).b; }

}  // namespace kappa
