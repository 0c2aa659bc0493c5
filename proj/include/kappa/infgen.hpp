#pragma once

#include <functional>
#include <utility>

#include "kappa/groupoid.hpp"

namespace kappa {

/// Bases of the subalgebras b, c, a (as coefficient columns) and the coordinate
/// functionals of the splittings g = b + c and g = a + c. Built once per n.
struct Projections {
  int n;
  Mat basis_b;    // M_kl, 1 <= k < l <= n+1
  Mat basis_c;    // c0, c1..cn
  Mat basis_a;    // M_ab, 0 <= a < b <= n
  Mat coord_b;    // b-part of the b + c splitting
  Mat coord_c;    // c-part of the b + c splitting
  Mat coord_a;    // a-part of the a + c splitting
  Mat coord_ct;   // c-part of the a + c splitting
  Vec tr_ad_c;    // Tr ad(c_k)|c
};
const Projections& projections(int n);

struct ProjAd {
  Mat adB;
  Mat adC;
  Mat adCtilde;
};
ProjAd ad_proj(const GroupMatrix& g);
/// P_c Ad(g)|c alone (cheaper than ad_proj).
Mat ad_c(const GroupMatrix& g);
/// P~_c Ad(g)|c alone.
Mat ad_c_tilde(const GroupMatrix& g);
/// P_b Ad(g)|c, in the basis M_kl of b.
Mat ad_b_on_c(const GroupMatrix& g);
/// P_a Ad(g)|c along c, in the basis of a.
Mat ad_a_on_c(const GroupMatrix& g);

struct Modular {
  double jB;
  double jC;
};
Modular modular(const GroupMatrix& g);
/// Tr ad(x)|c for x given in c-coordinates.
double tr_ad_c(int n, const Vec& cdot);

/// The element sum_k x_k c_k of c.
LieElement c_element(int n, const Vec& cdot);
/// Coordinates of an element of b in the basis M_kl.
LieElement b_element(int n, const Vec& coords);
LieElement a_element(int n, const Vec& coords);

Mat w_matrix(const AParam& a);
Mat w_of_b(const BParam& b);

/// Right-trivialized tangent vector: the tangent at base is vec * base.
template <class Point>
struct TangentAtPoint {
  Point base;
  LieElement vec;
};

TangentAtPoint<GroupoidPoint> riv_field(const Vec& cdot, const GroupoidPoint& g);
TangentAtPoint<AGroupoidPoint> riv_field_a(const Vec& cdot, const AGroupoidPoint& p);
/// Anchor -(P_b Ad(b) cdot) in b, the tangent at b being vec * b.
LieElement anchor(const Vec& cdot, const BParam& b);
/// Anchor -(Ad^a(a) cdot) in a.
LieElement anchor_a(const Vec& cdot, const AParam& a);

/// Flow of the bisections B exp(t x) on G_B and on Gamma_A.
GroupoidPoint flow(const Vec& cdot, double t, const GroupoidPoint& g);
AGroupoidPoint flow_a(const Vec& cdot, double t, const AGroupoidPoint& p);

struct PointPair {
  GroupoidPoint first;
  GroupoidPoint second;
};
enum class Coproduct { Delta0, Delta };
/// Action of the bisection delta_0(B c0) or delta(B c0) of the product groupoid.
PointPair bisection_image(const CParam& c0, Coproduct which, const PointPair& p);
/// C-part of the CA factorization of b c, i.e. c_L(b c) c~_L(b_R(b c)).
CParam c_tilde_left_of(const BParam& b, const CParam& c);

/// Central difference of a matrix curve, right-trivialized and projected onto so(eta).
/// With richardson set, combines steps h and h/2.
LieElement fd_tangent(const std::function<GroupMatrix(double)>& curve, double h, bool richardson = false);

}  // namespace kappa
