#pragma once

#include <utility>

#include "kappa/decomp.hpp"

namespace kappa {

/// The point b c of G_B.
struct GroupoidPoint {
  BParam b;
  CParam c;
  int n() const { return b.n(); }
  GroupMatrix matrix() const { return embed_b(b) * embed_c(c); }
};

/// The point a c of Gamma_A.
struct AGroupoidPoint {
  AParam a;
  CParam c;
  int n() const { return a.n(); }
  GroupMatrix matrix() const { return embed_a(a) * embed_c(c); }
};

/// Chart of Gamma_0 = O(n)^- x (R_+ x R^n x R^n).
struct Gamma0Coord {
  Mat K;
  double t = 1.0;
  Vec x1;
  Vec x2;
};

inline constexpr double kComposeTol = 1e-8;

GroupoidPoint gb_unit(const BParam& b);
std::pair<BParam, BParam> gb_ends(const GroupoidPoint& g);
BParam gb_right(const GroupoidPoint& g);
GroupoidPoint gb_compose(const GroupoidPoint& g1, const GroupoidPoint& g2, double tol = kComposeTol);
GroupoidPoint gb_inverse(const GroupoidPoint& g);
/// (B c0)(b c) = b_R(b c0^{-1}) c0 c
GroupoidPoint bisection_apply(const CParam& c0, const GroupoidPoint& g);

enum class Orbit { Gamma0, Gamma1 };
struct Classification {
  Orbit orbit;
  bool in_bprime;     // both ends have alpha != 0
  bool ends_equal;    // g lies in an isotropy group
  int isotropy_dim;   // n+1 on Gamma_1, 1 on Gamma_0
};
Classification classify(const GroupoidPoint& g);
bool in_gamma1(const BParam& b);
/// The isotropy curve through b for alpha != 1: c = (s, (s-1) w/(1-alpha)).
CParam isotropy_element(const BParam& b, double s);

/// Reflection R(v) in R^{n+1}.
Mat reflection(const Vec& v);
BParam phi_chart(const Mat& K, const Vec& v);
std::pair<Mat, Vec> psi_chart(const BParam& b);

Vec gamma00_action(const Vec& v, const CParam& c);
struct Gamma00Swap {
  CParam ct;
  Vec v_right;
};
/// Phi(K,v)(s,y) = (s~, y~) Phi(K, s v - y)
Gamma00Swap gamma00_swap(const Mat& K, const Vec& v, const CParam& c);
/// (s; x1, x2) -> (x1; s, s x1 - x2)
std::pair<Vec, CParam> gamma00_split(double s, const Vec& x1, const Vec& x2);
/// inverse of gamma00_split, returns (s, x1, x2)
std::tuple<double, Vec, Vec> gamma00_unsplit(const Vec& v, const CParam& c);
Gamma0Coord gamma0_coords(const GroupoidPoint& g);
GroupoidPoint from_gamma0(const Gamma0Coord& x);

// Gamma_A, with ends read through the CA factorization
AGroupoidPoint ga_unit(const AParam& a);
AParam ga_right(const AGroupoidPoint& g);
AGroupoidPoint ga_compose(const AGroupoidPoint& g1, const AGroupoidPoint& g2, double tol = kComposeTol);
AGroupoidPoint ga_inverse(const AGroupoidPoint& g);
/// c~_L(a c0^{-1})^{-1} a c written again as a' c'
AGroupoidPoint ga_bisection_apply(const CParam& c0, const AGroupoidPoint& g);

/// a c -> b_R(a) c
GroupoidPoint gamma_a_to_b(const AGroupoidPoint& p);
/// b c -> a_R(b) c, needs alpha != 0 at both ends
AGroupoidPoint gamma_b_to_a(const GroupoidPoint& g);

/// Action of C on B behind G_B = B x| C: (b, c) -> b_R(b c).
BParam trans_action(const BParam& b, const CParam& c);

double b_distance(const BParam& x, const BParam& y);
double c_distance(const CParam& x, const CParam& y);
double a_distance(const AParam& x, const AParam& y);

}  // namespace kappa
