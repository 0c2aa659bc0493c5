#include "kappa/infgen.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace kappa {

namespace {

std::unique_ptr<Projections> build_projections(int n) {
  auto p = std::make_unique<Projections>();
  p->n = n;
  const int dim = lie_dim(n);
  const int nb = n * (n + 1) / 2;
  p->basis_b.resize(dim, nb);
  p->basis_a.resize(dim, nb);
  p->basis_c.resize(dim, n + 1);
  int ib = 0;
  for (int k = 1; k <= n + 1; ++k)
    for (int l = k + 1; l <= n + 1; ++l) p->basis_b.col(ib++) = gen_basis(n, k, l).coeffs();
  int ia = 0;
  for (int a = 0; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b) p->basis_a.col(ia++) = gen_basis(n, a, b).coeffs();
  for (int k = 0; k <= n; ++k) p->basis_c.col(k) = c_basis(n, k).coeffs();

  Mat sbc(dim, dim), sac(dim, dim);
  sbc << p->basis_b, p->basis_c;
  sac << p->basis_a, p->basis_c;
  const Mat ibc = sbc.inverse(), iac = sac.inverse();
  p->coord_b = ibc.topRows(nb);
  p->coord_c = ibc.bottomRows(n + 1);
  p->coord_a = iac.topRows(nb);
  p->coord_ct = iac.bottomRows(n + 1);

  p->tr_ad_c.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    Mat ad(n + 1, n + 1);
    for (int l = 0; l <= n; ++l) ad.col(l) = p->coord_c * bracket(c_basis(n, k), c_basis(n, l)).coeffs();
    p->tr_ad_c(k) = ad.trace();
  }
  return p;
}

}  // namespace

const Projections& projections(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Projections>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_projections(n)).first;
  return *it->second;
}

ProjAd ad_proj(const GroupMatrix& g) {
  const Projections& p = projections(g.n());
  const Mat ad = adjoint_matrix(g);
  return {p.coord_b * ad * p.basis_b, p.coord_c * ad * p.basis_c, p.coord_ct * ad * p.basis_c};
}

namespace {

// Ad(g) applied to the c basis, one conjugation per basis element
Mat ad_on_c(const GroupMatrix& g) {
  const int n = g.n();
  const Mat gi = g.inverse().mat();
  Mat out(lie_dim(n), n + 1);
  for (int k = 0; k <= n; ++k) out.col(k) = LieElement(g.mat() * c_basis(n, k).matrix() * gi).coeffs();
  return out;
}

}  // namespace

Mat ad_c(const GroupMatrix& g) { return projections(g.n()).coord_c * ad_on_c(g); }
Mat ad_c_tilde(const GroupMatrix& g) { return projections(g.n()).coord_ct * ad_on_c(g); }
Mat ad_b_on_c(const GroupMatrix& g) { return projections(g.n()).coord_b * ad_on_c(g); }
Mat ad_a_on_c(const GroupMatrix& g) { return projections(g.n()).coord_a * ad_on_c(g); }

Modular modular(const GroupMatrix& g) {
  const ProjAd p = ad_proj(g);
  return {std::abs(p.adB.determinant()), std::abs(p.adC.determinant())};
}

double tr_ad_c(int n, const Vec& cdot) { return projections(n).tr_ad_c.dot(cdot); }

LieElement c_element(int n, const Vec& cdot) {
  return LieElement::from_coeffs(n, projections(n).basis_c * cdot);
}
LieElement b_element(int n, const Vec& coords) {
  return LieElement::from_coeffs(n, projections(n).basis_b * coords);
}
LieElement a_element(int n, const Vec& coords) {
  return LieElement::from_coeffs(n, projections(n).basis_a * coords);
}

Mat w_matrix(const AParam& a) {
  validate(a);
  const int n = a.n();
  const double q = a.z.squaredNorm();
  Mat D1 = a.d * Mat::Identity(n, n);
  D1(n - 1, n - 1) = 1.0;
  Mat W(n + 1, n + 1);
  W(0, 0) = a.d * (1 + q) / (1 - q);
  W.block(0, 1, 1, n) = 2 * a.z.transpose() * a.U * D1 / (1 - q);
  W.block(1, 0, n, 1) = 2.0 * a.d * a.z / (1 - q);
  W.block(1, 1, n, n) = (Mat::Identity(n, n) + 2 * a.z * a.z.transpose() / (1 - q)) * a.U * D1;
  return W;
}

// closed form in the B entries; agrees with w_matrix(a_right(b))
Mat w_of_b(const BParam& b) {
  if (std::abs(b.alpha) < kBPrimeGuard) throw DomainError("b not in B' (alpha = 0)");
  const int n = b.n();
  const double al = b.alpha, sg = al < 0 ? -1.0 : 1.0;
  Mat W(n + 1, n + 1);
  W(0, 0) = 1 / al;
  W.block(0, 1, 1, n) = b.w.transpose() / al;
  W.block(1, 0, n, 1) = -b.u / std::abs(al);
  W.block(1, 1, n, n) = sg * (b.Lambda - b.u * b.w.transpose() / al);
  return W;
}

TangentAtPoint<GroupoidPoint> riv_field(const Vec& cdot, const GroupoidPoint& g) {
  const int n = g.n();
  return {g, c_element(n, ad_c(embed_b(g.b)) * cdot)};
}

TangentAtPoint<AGroupoidPoint> riv_field_a(const Vec& cdot, const AGroupoidPoint& p) {
  const int n = p.n();
  return {p, c_element(n, ad_c_tilde(embed_a(p.a)) * cdot)};
}

LieElement anchor(const Vec& cdot, const BParam& b) {
  return -b_element(b.n(), ad_b_on_c(embed_b(b)) * cdot);
}

LieElement anchor_a(const Vec& cdot, const AParam& a) {
  return -a_element(a.n(), ad_a_on_c(embed_a(a)) * cdot);
}

GroupoidPoint flow(const Vec& cdot, double t, const GroupoidPoint& g) {
  return bisection_apply(exp_c(from_c_coords(t * cdot)), g);
}

AGroupoidPoint flow_a(const Vec& cdot, double t, const AGroupoidPoint& p) {
  return ga_bisection_apply(exp_c(from_c_coords(t * cdot)), p);
}

CParam c_tilde_left_of(const BParam& b, const CParam& c) {
  const CBFactors f = swap_bc_to_cb(b, c);
  return c_mul(f.c, c_tilde_left(f.b));
}

PointPair bisection_image(const CParam& c0, Coproduct which, const PointPair& p) {
  const CParam c0i = c_inv(c0);
  const GroupoidPoint second = bisection_apply(c0, p.second);
  if (which == Coproduct::Delta0) {
    const CParam cl = swap_bc_to_cb(p.second.b, c0i).c;
    return {bisection_apply(c_inv(cl), p.first), second};
  }
  if (std::abs(p.second.b.alpha) < kBPrimeGuard || std::abs(second.b.alpha) < kBPrimeGuard)
    throw DomainError("delta(B c0) needs b2 and b_R(b2 c0^{-1}) in B'");
  // x = c~_L(b2)^{-1} c~_L(b2 c0^{-1}); the first leg is moved by the bisection of x^{-1}
  const CParam x = c_mul(c_inv(c_tilde_left(p.second.b)), c_tilde_left_of(p.second.b, c0i));
  return {bisection_apply(c_inv(x), p.first), second};
}

LieElement fd_tangent(const std::function<GroupMatrix(double)>& curve, double h, bool richardson) {
  const GroupMatrix base = curve(0.0);
  const Mat bi = base.inverse().mat();
  auto diff = [&](double step) -> Mat {
    return (curve(step).mat() - curve(-step).mat()) * bi / (2 * step);
  };
  Mat d = diff(h);
  if (richardson) d = (4 * diff(h / 2) - d) / 3;
  const Mat eta = MinkForm(base.n()).matrix();
  return LieElement(0.5 * (d - eta * d.transpose() * eta));
}

}  // namespace kappa
