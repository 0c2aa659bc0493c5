#include "kappa/groups.hpp"

#include <cmath>
#include <string>

namespace kappa {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

Mat d_matrix(int n, int d) {
  Mat D = Mat::Identity(n, n);
  D(n - 1, n - 1) = d;
  return D;
}

// pure boost of SO0(1,n) with parameter z
Mat boost(const Vec& z) {
  const int n = static_cast<int>(z.size());
  const double q = z.squaredNorm();
  Mat L(n + 1, n + 1);
  L(0, 0) = (1 + q) / (1 - q);
  L.block(0, 1, 1, n) = (2 / (1 - q)) * z.transpose();
  L.block(1, 0, n, 1) = (2 / (1 - q)) * z;
  L.block(1, 1, n, n) = Mat::Identity(n, n) + (2 / (1 - q)) * z * z.transpose();
  return L;
}

}  // namespace

BParam BParam::identity(int n) { return {Mat::Identity(n, n), Vec::Zero(n), Vec::Zero(n), 1.0}; }

Mat BParam::block() const {
  const int m = n();
  Mat r(m + 1, m + 1);
  r.topLeftCorner(m, m) = Lambda;
  r.topRightCorner(m, 1) = u;
  r.bottomLeftCorner(1, m) = w.transpose();
  r(m, m) = alpha;
  return r;
}

BParam BParam::from_block(const Mat& r) {
  const int m = static_cast<int>(r.rows()) - 1;
  return {r.topLeftCorner(m, m), r.topRightCorner(m, 1), r.bottomLeftCorner(1, m).transpose(), r(m, m)};
}

double b_constraint_residual(const BParam& b) {
  const int n = b.n();
  const Mat I = Mat::Identity(n, n);
  const Mat& L = b.Lambda;
  double r = 0.0;
  r = std::max(r, (L * L.transpose() + b.u * b.u.transpose() - I).cwiseAbs().maxCoeff());
  r = std::max(r, (L * b.w + b.alpha * b.u).cwiseAbs().maxCoeff());
  r = std::max(r, (L.transpose() * L + b.w * b.w.transpose() - I).cwiseAbs().maxCoeff());
  r = std::max(r, (L.transpose() * b.u + b.alpha * b.w).cwiseAbs().maxCoeff());
  r = std::max(r, std::abs(b.u.squaredNorm() + b.alpha * b.alpha - 1.0));
  r = std::max(r, std::abs(b.w.squaredNorm() + b.alpha * b.alpha - 1.0));
  return r;
}

void validate(const AParam& a, double tol) {
  const int n = a.n();
  require(n >= 1, "A element needs n >= 1");
  if (a.U.rows() != n || a.U.cols() != n) throw DimensionError("U must be n x n");
  require(a.z.norm() < 1.0, "A element needs |z| < 1");
  require((a.U.transpose() * a.U - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= tol, "U not orthogonal");
  require(std::abs(a.U.determinant() - 1.0) <= 1e-8, "det U != 1");
  require(a.d == 1 || a.d == -1, "d must be +-1");
}

void validate(const BParam& b, double tol) {
  const int n = b.n();
  if (b.Lambda.rows() != n || b.Lambda.cols() != n || b.w.size() != n) throw DimensionError("B blocks");
  const double r = b_constraint_residual(b);
  require(r <= tol, "B block identities violated, residual " + std::to_string(r));
  require(std::abs(b.Lambda.determinant() - b.alpha) <= 1e-8, "alpha != det Lambda");
}

void validate(const CParam& c) { require(c.s > 0.0 && std::isfinite(c.s), "C element needs s > 0"); }

GroupMatrix embed_a(const AParam& a) {
  validate(a);
  const int n = a.n();
  Mat g = Mat::Zero(n + 2, n + 2);
  Mat rot = Mat::Identity(n + 1, n + 1);
  rot.bottomRightCorner(n, n) = a.U * d_matrix(n, a.d);
  g.topLeftCorner(n + 1, n + 1) = boost(a.z) * rot;
  g(n + 1, n + 1) = a.d;
  return GroupMatrix(g);
}

AParam recover_a(const GroupMatrix& g, double tol) {
  const int n = g.n();
  const Mat& m = g.mat();
  // rounding in a boost grows with its size
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require(g.eta_residual() <= tol * scale * scale, "not eta-orthogonal");
  const double d = m(n + 1, n + 1);
  require(std::abs(std::abs(d) - 1.0) <= tol * scale, "not in A: corner entry");
  require(m.row(n + 1).head(n + 1).cwiseAbs().maxCoeff() <= tol * scale &&
              m.col(n + 1).head(n + 1).cwiseAbs().maxCoeff() <= tol * scale,
          "not in A: last row/column");
  require(m(0, 0) >= 1.0 - tol, "not in A: time orientation");
  AParam a;
  a.d = d > 0 ? 1 : -1;
  a.z = m.block(1, 0, n, 1) / (1.0 + m(0, 0));
  const Mat rot = boost(-a.z) * m.topLeftCorner(n + 1, n + 1);
  // snap to the nearest rotation, rounding in large boosts leaves it slightly off
  Eigen::JacobiSVD<Mat> svd(rot.bottomRightCorner(n, n) * d_matrix(n, a.d), Eigen::ComputeFullU | Eigen::ComputeFullV);
  a.U = svd.matrixU() * svd.matrixV().transpose();
  require(a.z.norm() < 1.0, "not in A: boost parameter");
  return a;
}

GroupMatrix embed_b(const BParam& b) {
  validate(b);
  const int n = b.n();
  Mat g = Mat::Identity(n + 2, n + 2);
  g.bottomRightCorner(n + 1, n + 1) = b.block();
  return GroupMatrix(g);
}

BParam recover_b(const GroupMatrix& g, double tol) {
  const int n = g.n();
  const Mat& m = g.mat();
  require(std::abs(m(0, 0) - 1.0) <= tol && m.row(0).tail(n + 1).cwiseAbs().maxCoeff() <= tol &&
              m.col(0).tail(n + 1).cwiseAbs().maxCoeff() <= tol,
          "not in B: first row/column");
  BParam b = BParam::from_block(m.bottomRightCorner(n + 1, n + 1));
  require(b_constraint_residual(b) <= tol, "not in B: block identities");
  return b;
}

GroupMatrix embed_c(const CParam& c) {
  validate(c);
  const int n = c.n();
  const double s = c.s, q = c.y.squaredNorm();
  Mat g = Mat::Zero(n + 2, n + 2);
  g(0, 0) = (s * s + 1 + q) / (2 * s);
  g.block(0, 1, 1, n) = -c.y.transpose() / s;
  g(0, n + 1) = (s * s - 1 + q) / (2 * s);
  g.block(1, 0, n, 1) = -c.y;
  g.block(1, 1, n, n) = Mat::Identity(n, n);
  g.block(1, n + 1, n, 1) = -c.y;
  g(n + 1, 0) = (s * s - 1 - q) / (2 * s);
  g.block(n + 1, 1, 1, n) = c.y.transpose() / s;
  g(n + 1, n + 1) = (s * s + 1 - q) / (2 * s);
  return GroupMatrix(g);
}

CParam recover_c(const GroupMatrix& g, double tol) {
  const int n = g.n();
  const Mat& m = g.mat();
  CParam c{m(0, 0) + m(n + 1, 0), -m.block(1, 0, n, 1)};
  require(c.s > 0.0, "not in C: s <= 0");
  const double r = (embed_c(c).mat() - m).cwiseAbs().maxCoeff();
  require(r <= tol * std::max(1.0, m.cwiseAbs().maxCoeff()), "not in C, residual " + std::to_string(r));
  return c;
}

CParam c_mul(const CParam& c1, const CParam& c2) {
  if (c1.n() != c2.n()) throw DimensionError("C product of different n");
  return {c1.s * c2.s, c2.s * c1.y + c2.y};
}

CParam c_inv(const CParam& c) { return {1.0 / c.s, -c.y / c.s}; }

BParam b_mul(const BParam& b1, const BParam& b2) {
  if (b1.n() != b2.n()) throw DimensionError("B product of different n");
  return BParam::from_block(b1.block() * b2.block());
}

BParam b_inv(const BParam& b) { return BParam::from_block(b.block().transpose()); }

AParam a_mul(const AParam& a1, const AParam& a2) { return recover_a(embed_a(a1) * embed_a(a2)); }

AParam a_inv(const AParam& a) { return recover_a(embed_a(a).inverse()); }

LieElement c_basis(int n, int k) {
  if (k < 0 || k > n) throw std::out_of_range("C basis index");
  if (k == 0) return gen_basis(n, 0, n + 1);
  // M_{k0} = -M_{0k}
  return gen_basis(n, k, n + 1) + gen_basis(n, 0, k);
}

Vec c_coords(const CLieParam& x) {
  Vec v(x.n() + 1);
  v(0) = -x.sdot;
  v.tail(x.n()) = x.ydot;
  return v;
}

CLieParam from_c_coords(const Vec& v) { return {-v(0), v.tail(v.size() - 1)}; }

LieElement to_algebra(const CLieParam& x) {
  const int n = x.n();
  const Vec v = c_coords(x);
  LieElement out = LieElement::zero(n);
  for (int k = 0; k <= n; ++k) out = out + v(k) * c_basis(n, k);
  return out;
}

CLieParam from_algebra(const LieElement& x) {
  const int n = x.n();
  const Vec co = x.coeffs();
  Vec v(n + 1);
  v(0) = co(basis_index(n, 0, n + 1));
  for (int k = 1; k <= n; ++k) v(k) = co(basis_index(n, k, n + 1));
  return from_c_coords(v);
}

double expm1_over(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
  return std::expm1(x) / x;
}

double log_over(double x) {
  const double d = x - 1.0;
  if (std::abs(d) < 1e-4) return 1.0 - d / 2.0 + d * d / 3.0 - d * d * d / 4.0;
  return std::log(x) / d;
}

CParam exp_c(const CLieParam& x) { return {std::exp(x.sdot), x.ydot * expm1_over(x.sdot)}; }

CLieParam log_c(const CParam& c) {
  validate(c);
  return {std::log(c.s), c.y * log_over(c.s)};
}

Mat sample_rotation(int m, Rng& rng) {
  std::normal_distribution<double> gauss;
  Mat g(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (int i = 0; i < m; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

AParam sample_a(int n, Rng& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec dir(n);
  for (int i = 0; i < n; ++i) dir(i) = gauss(rng);
  const double radius = 0.9 * std::pow(unit(rng), 1.0 / n);
  AParam a;
  a.z = radius * dir / dir.norm();
  a.U = sample_rotation(n, rng);
  a.d = unit(rng) < 0.5 ? -1 : 1;
  return a;
}

BParam sample_b(int n, Rng& rng) { return BParam::from_block(sample_rotation(n + 1, rng)); }

CParam sample_c(int n, Rng& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> ls(-2.0, 2.0);
  CParam c;
  c.s = std::exp(ls(rng));
  c.y.resize(n);
  for (int i = 0; i < n; ++i) c.y(i) = gauss(rng);
  return c;
}

GroupMatrix sample_element(Kind kind, int n, std::uint64_t seed) {
  Rng rng(seed);
  switch (kind) {
    case Kind::A:
      return embed_a(sample_a(n, rng));
    case Kind::B:
      return embed_b(sample_b(n, rng));
    case Kind::C:
      return embed_c(sample_c(n, rng));
    case Kind::G: {
      const BParam b = sample_b(n, rng);
      return embed_b(b) * embed_c(sample_c(n, rng));
    }
  }
  throw std::invalid_argument("sample kind");
}

}  // namespace kappa
