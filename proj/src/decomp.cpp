#include "kappa/decomp.hpp"

#include <cmath>
#include <string>

namespace kappa {

namespace {

int sgn(double x) { return x < 0 ? -1 : 1; }

// how much rounding in f1 f2 is amplified relative to the size of the product
double growth(const GroupMatrix& f1, const GroupMatrix& f2, const GroupMatrix& p) {
  const double a = f1.mat().cwiseAbs().maxCoeff() * f2.mat().cwiseAbs().maxCoeff();
  return std::max(1.0, a / p.mat().cwiseAbs().maxCoeff());
}

void check_scale(double m, const char* what) {
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError(std::string(what) + ": non-positive swap scale");
}

}  // namespace

double swap_scale(const BParam& b, const CParam& c) {
  const double s = c.s, q = c.y.squaredNorm();
  return 0.5 * (1 / (s * s) + q / (s * s) + 1) - 0.5 * b.alpha * (1 / (s * s) + q / (s * s) - 1) -
         b.w.dot(c.y) / s;
}

double swap_scale_alt(const BParam& b, const CParam& c) {
  const double s = c.s, k = 1 - b.alpha;
  return (std::pow(k / s, 2) + (b.w - k * c.y / s).squaredNorm()) / (2 * k);
}

double swap_scale_inverse(const CParam& ct, const BParam& bt) {
  const double s = ct.s, q = ct.y.squaredNorm();
  return 0.5 * (s * s + q + 1) - 0.5 * bt.alpha * (s * s + q - 1) + bt.u.dot(ct.y);
}

double swap_scale_inverse_alt(const CParam& ct, const BParam& bt) {
  // mirror image of the forward form: s -> 1/s~, y -> -y~/s~, w -> -u~
  const double k = 1 - bt.alpha;
  return (std::pow(k * ct.s, 2) + (bt.u + k * ct.y).squaredNorm()) / (2 * k);
}

CBFactors swap_bc_to_cb(const BParam& b, const CParam& c) {
  if (b.n() != c.n()) throw DimensionError("swap of different n");
  validate(c);
  const double s = c.s, q = c.y.squaredNorm(), wy = b.w.dot(c.y), k = 1 - b.alpha;
  const double M = swap_scale(b, c);
  check_scale(M, "swap_bc_to_cb");
  CBFactors out;
  out.M = M;
  out.c.s = M * s;
  const Vec ly = b.Lambda * c.y;
  out.c.y = ly - ((s * s - 1 - q) / (2 * s)) * b.u;
  const Vec r = b.w - k * c.y / s;
  out.b.u = ((1 - wy / s) * b.u - (k / s) * ly) / (M * s);
  out.b.w = r / (M * s);
  out.b.alpha = 1 - k / (M * s * s);
  // lower-right block of c~^{-1} b c, regular at alpha = 1
  out.b.Lambda = b.Lambda + b.u * c.y.transpose() / s + (out.c.y / out.c.s) * r.transpose();
  return out;
}

Mat swap_lambda_factored(const BParam& b, const CParam& c) {
  const int n = b.n();
  const double s = c.s, k = 1 - b.alpha;
  if (std::abs(k) < kBPrimeGuard) throw DomainError("factored form needs alpha != 1");
  const double M = swap_scale(b, c);
  const Vec r = b.w - k * c.y / s;
  return (b.Lambda - b.u * b.w.transpose() / (b.alpha - 1)) *
         (Mat::Identity(n, n) - r * r.transpose() / (M * k));
}

Mat swap_invariant(const BParam& b) {
  if (std::abs(1 - b.alpha) < kBPrimeGuard) throw DomainError("swap invariant needs alpha != 1");
  return b.Lambda - b.u * b.w.transpose() / (b.alpha - 1);
}

BCFactors swap_cb_to_bc(const CParam& ct, const BParam& bt) {
  if (bt.n() != ct.n()) throw DimensionError("swap of different n");
  validate(ct);
  const double s = ct.s, q = ct.y.squaredNorm(), uy = bt.u.dot(ct.y), k = 1 - bt.alpha;
  const double M = swap_scale_inverse(ct, bt);
  check_scale(M, "swap_cb_to_bc");
  const double h = (s * s + q - 1) / 2;
  const Vec lty = bt.Lambda.transpose() * ct.y;
  BCFactors out;
  out.M = M;
  out.c.s = s / M;
  out.c.y = (lty - h * bt.w) / M;
  const Vec v = bt.u + k * ct.y;
  out.b.u = (s / M) * v;
  out.b.w = (s / M) * (k * lty + (1 + uy) * bt.w);
  out.b.Lambda = bt.Lambda - ((1 + uy) * ct.y * bt.w.transpose() - h * bt.u * bt.w.transpose() +
                              v * ct.y.transpose() * bt.Lambda) /
                                 M;
  out.b.alpha = 1 - s * s * k / M;
  return out;
}

BCFactors factor_bc(const GroupMatrix& g) {
  const int n = g.n();
  const Mat& m = g.mat();
  const double den = m(0, 0) - m(0, n + 1);
  if (!(den > 0.0)) throw DomainError("factor_bc: element outside SO0(1,n+1)");
  BCFactors out;
  out.c.s = 1.0 / den;
  out.c.y = -out.c.s * m.block(0, 1, 1, n).transpose();
  out.b = BParam::from_block((m * embed_c(c_inv(out.c)).mat()).bottomRightCorner(n + 1, n + 1));
  return out;
}

CBFactors factor_cb(const GroupMatrix& g) {
  const int n = g.n();
  const Mat& m = g.mat();
  CBFactors out;
  out.c.s = m(0, 0) + m(n + 1, 0);
  if (!(out.c.s > 0.0)) throw DomainError("factor_cb: element outside SO0(1,n+1)");
  out.c.y = -m.block(1, 0, n, 1);
  out.b = BParam::from_block((embed_c(c_inv(out.c)).mat() * m).bottomRightCorner(n + 1, n + 1));
  return out;
}

CAFactors factor_ca(const GroupMatrix& g, double tol) {
  // last column of c a is d times the last column of c
  const int n = g.n();
  const Mat& m = g.mat();
  const double v = m(0, n + 1) + m(n + 1, n + 1);
  if (std::abs(v) < kBPrimeGuard) throw DomainError("factor_ca: element not in CA");
  const int d = sgn(v);
  CAFactors out;
  out.c.s = std::abs(v);
  out.c.y = -d * m.block(1, n + 1, n, 1);
  const GroupMatrix ci = embed_c(c_inv(out.c));
  const GroupMatrix am = ci * g;
  out.a = recover_a(am, tol * growth(ci, g, am));
  return out;
}

ACFactors factor_ac(const GroupMatrix& g, double tol) {
  // last row of a c is d times the last row of c
  const int n = g.n();
  const Mat& m = g.mat();
  const double v = m(n + 1, n + 1) - m(n + 1, 0);
  if (std::abs(v) < kBPrimeGuard) throw DomainError("factor_ac: element not in AC");
  const int d = sgn(v);
  ACFactors out;
  out.c.s = 1.0 / std::abs(v);
  out.c.y = d * out.c.s * m.block(n + 1, 1, 1, n).transpose();
  const GroupMatrix ci = embed_c(c_inv(out.c));
  const GroupMatrix am = g * ci;
  out.a = recover_a(am, tol * growth(g, ci, am));
  return out;
}

CBFactors a_factor(const AParam& a) {
  validate(a);
  const int n = a.n();
  const double q = a.z.squaredNorm();
  Mat D = Mat::Identity(n, n);
  D(n - 1, n - 1) = a.d;
  CBFactors out;
  out.c.s = (1 + q) / (1 - q);
  out.c.y = -2 * a.z / (1 - q);
  out.b.Lambda = (Mat::Identity(n, n) - 2 * a.z * a.z.transpose() / (1 + q)) * a.U * D;
  out.b.u = -2.0 * a.d * a.z / (1 + q);
  out.b.w = 2 * D * a.U.transpose() * a.z / (1 + q);
  out.b.alpha = a.d * (1 - q) / (1 + q);
  return out;
}

CAFactors ca_project(const BParam& b) {
  if (std::abs(b.alpha) < kBPrimeGuard) throw DomainError("b not in B' (alpha = 0)");
  const int n = b.n();
  const int d = sgn(b.alpha);
  const double aa = std::abs(b.alpha);
  Mat D = Mat::Identity(n, n);
  D(n - 1, n - 1) = d;
  CAFactors out;
  out.c = {aa, -d * b.u};
  out.a.z = -d * b.u / (1 + aa);
  out.a.U = (b.Lambda - d * b.u * b.w.transpose() / (1 + aa)) * D;
  out.a.d = d;
  return out;
}

CParam c_tilde_left(const BParam& b) { return ca_project(b).c; }
AParam a_right(const BParam& b) { return ca_project(b).a; }

CPair recover_pair(const BParam& b1, const BParam& b2, double tol) {
  if (b1.n() != b2.n()) throw DimensionError("recover_pair of different n");
  const double k1 = b1.alpha - 1, k2 = b2.alpha - 1;
  if (std::abs(k1) < kBPrimeGuard || std::abs(k2) < kBPrimeGuard)
    throw DomainError("recover_pair needs alpha != 1 on both sides");
  const double r = (swap_invariant(b1) - swap_invariant(b2)).cwiseAbs().maxCoeff();
  if (r > tol) throw DomainError("recover_pair: swap invariants differ by " + std::to_string(r));
  const double s = 1.0;
  CPair out;
  out.c.s = s;
  out.ct.s = k1 / k2 / s;
  if (!(out.ct.s > 0)) throw DomainError("recover_pair: inconsistent signs of alpha - 1");
  out.ct.y = b1.u / (s * (-k2)) - b2.u / (-k2);
  out.c.y = b2.w / k2 - s * b1.w / k1;
  return out;
}

BParam b_left(const GroupMatrix& g) { return factor_bc(g).b; }
CParam c_right(const GroupMatrix& g) { return factor_bc(g).c; }
CParam c_left(const GroupMatrix& g) { return factor_cb(g).c; }
BParam b_right(const GroupMatrix& g) { return factor_cb(g).b; }
CParam c_tilde_left(const GroupMatrix& g) { return factor_ca(g).c; }
AParam a_right(const GroupMatrix& g) { return factor_ca(g).a; }

BParam b_right(const BParam& b, const CParam& c) { return swap_bc_to_cb(b, c).b; }

}  // namespace kappa
