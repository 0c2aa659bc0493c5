#include "kappa/minkalg.hpp"

#include <cmath>
#include <string>

namespace kappa {

MinkForm::MinkForm(int n_) : n(n_) {
  if (n < 1) throw DimensionError("n must be >= 1");
  eta = -Vec::Ones(n + 2);
  eta(0) = 1.0;
}

int lie_dim(int n) { return (n + 2) * (n + 1) / 2; }

int basis_index(int n, int a, int b) {
  const int N = n + 2;
  if (a < 0 || b >= N || a >= b)
    throw std::out_of_range("basis index needs 0 <= a < b <= n+1");
  // rows before a contribute (N-1) + (N-2) + ... + (N-a)
  return a * (2 * N - a - 1) / 2 + (b - a - 1);
}

std::pair<int, int> basis_pair(int n, int idx) {
  const int N = n + 2;
  for (int a = 0; a < N; ++a) {
    const int row = N - a - 1;
    if (idx < row) return {a, a + 1 + idx};
    idx -= row;
  }
  throw std::out_of_range("basis position");
}

namespace {

double eta_at(int i) { return i == 0 ? 1.0 : -1.0; }

}  // namespace

LieElement::LieElement(Mat m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 3) throw DimensionError("so(eta) element must be square, size >= 3");
}

LieElement LieElement::zero(int n) { return LieElement(Mat::Zero(n + 2, n + 2)); }

LieElement LieElement::from_coeffs(int n, const Vec& c) {
  if (c.size() != lie_dim(n)) throw DimensionError("coefficient vector length");
  Mat m = Mat::Zero(n + 2, n + 2);
  for (int i = 0; i < c.size(); ++i) {
    auto [a, b] = basis_pair(n, i);
    m(a, b) += c(i) * eta_at(b);
    m(b, a) -= c(i) * eta_at(a);
  }
  return LieElement(std::move(m));
}

Vec LieElement::coeffs() const {
  const int nn = n();
  Vec c(lie_dim(nn));
  for (int i = 0; i < c.size(); ++i) {
    auto [a, b] = basis_pair(nn, i);
    c(i) = m_(a, b) * eta_at(b);
  }
  return c;
}

double LieElement::antisymmetry_residual() const {
  const Mat eta = MinkForm(n()).matrix();
  return (m_.transpose() * eta + eta * m_).cwiseAbs().maxCoeff();
}

LieElement LieElement::operator+(const LieElement& o) const {
  if (o.m_.rows() != m_.rows()) throw DimensionError("so(eta) sum of different n");
  return LieElement(m_ + o.m_);
}

LieElement LieElement::operator-(const LieElement& o) const {
  if (o.m_.rows() != m_.rows()) throw DimensionError("so(eta) difference of different n");
  return LieElement(m_ - o.m_);
}

GroupMatrix GroupMatrix::identity(int n) { return GroupMatrix(Mat::Identity(n + 2, n + 2)); }

GroupMatrix GroupMatrix::checked(Mat m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 3) throw DimensionError("group matrix must be square, size >= 3");
  GroupMatrix g(std::move(m));
  const double r = g.eta_residual();
  if (!(r <= tol)) throw DomainError("g^T eta g != eta, residual " + std::to_string(r));
  if (std::abs(g.m_.determinant() - 1.0) > 1e-8) throw DomainError("det g != 1");
  return g;
}

GroupMatrix GroupMatrix::inverse() const {
  const Vec eta = MinkForm(n()).eta;
  return GroupMatrix(eta.asDiagonal() * m_.transpose() * eta.asDiagonal());
}

double GroupMatrix::eta_residual() const {
  const Mat eta = MinkForm(n()).matrix();
  return (m_.transpose() * eta * m_ - eta).cwiseAbs().maxCoeff();
}

LieElement gen_basis(int n, int a, int b) {
  Vec c = Vec::Zero(lie_dim(n));
  c(basis_index(n, a, b)) = 1.0;
  return LieElement::from_coeffs(n, c);
}

LieElement bivector(const Vec& v, const Vec& w) {
  if (v.size() != w.size()) throw DimensionError("bivector operands");
  const Vec eta = MinkForm(static_cast<int>(v.size()) - 2).eta;
  const Vec ev = eta.cwiseProduct(v), ew = eta.cwiseProduct(w);
  return LieElement(v * ew.transpose() - w * ev.transpose());
}

LieElement bracket(const LieElement& x, const LieElement& y) {
  if (x.n() != y.n()) throw DimensionError("bracket of different n");
  return LieElement(x.matrix() * y.matrix() - y.matrix() * x.matrix());
}

namespace {

// k is diagonal in the M_ab basis with entries -eta_a eta_b
Vec k_diag(int n) {
  Vec d(lie_dim(n));
  for (int i = 0; i < d.size(); ++i) {
    auto [a, b] = basis_pair(n, i);
    d(i) = -eta_at(a) * eta_at(b);
  }
  return d;
}

}  // namespace

double form_k(const LieElement& x, const LieElement& y) {
  if (x.n() != y.n()) throw DimensionError("form of different n");
  return x.coeffs().dot(k_diag(x.n()).cwiseProduct(y.coeffs()));
}

double form_ktilde(int n, const Vec& phi, const Vec& psi) {
  if (phi.size() != lie_dim(n) || psi.size() != lie_dim(n)) throw DimensionError("dual vector length");
  // the diagonal entries are +-1, so the inverse form has the same diagonal
  return phi.dot(k_diag(n).cwiseProduct(psi));
}

Vec k_flat(const LieElement& x) { return k_diag(x.n()).cwiseProduct(x.coeffs()); }

LieElement adjoint(const GroupMatrix& g, const LieElement& x) {
  if (g.n() != x.n()) throw DimensionError("adjoint of different n");
  return LieElement(g.mat() * x.matrix() * g.inverse().mat());
}

Mat adjoint_matrix(const GroupMatrix& g) {
  const int n = g.n();
  const int dim = lie_dim(n);
  const Mat gi = g.inverse().mat();
  Mat out(dim, dim);
  for (int i = 0; i < dim; ++i) {
    Vec e = Vec::Zero(dim);
    e(i) = 1.0;
    const Mat x = LieElement::from_coeffs(n, e).matrix();
    out.col(i) = LieElement(g.mat() * x * gi).coeffs();
  }
  return out;
}

Mat expm(const Mat& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Mat x = a / std::ldexp(1.0, squarings);
  // ||x|| <= 1/2, 20 terms is far below rounding
  Mat term = Mat::Identity(a.rows(), a.cols());
  Mat sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Mat logm(const Mat& a) {
  const int m = static_cast<int>(a.rows());
  const Mat id = Mat::Identity(m, m);
  Mat y = a;
  int roots = 0;
  while ((y - id).cwiseAbs().rowwise().sum().maxCoeff() > 0.25) {
    if (++roots > 60) throw DomainError("matrix logarithm: no principal branch");
    // Denman-Beavers square root
    Mat z = id;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      Eigen::PartialPivLU<Mat> ly(y), lz(z);
      if (std::abs(ly.determinant()) < 1e-300 || std::abs(lz.determinant()) < 1e-300)
        throw DomainError("matrix logarithm: singular iterate");
      const Mat yn = 0.5 * (y + lz.inverse());
      const Mat zn = 0.5 * (z + ly.inverse());
      const double step = (yn - y).cwiseAbs().maxCoeff();
      y = yn;
      z = zn;
      if (!y.allFinite()) throw DomainError("matrix logarithm: no principal branch");
      if (step <= 1e-15 * (1.0 + y.cwiseAbs().maxCoeff())) {
        converged = true;
        break;
      }
    }
    if (!converged) throw DomainError("matrix logarithm: square root did not converge");
  }
  // log(I+E) with ||E|| <= 1/4
  const Mat e = y - id;
  Mat power = e;
  Mat sum = e;
  for (int k = 2; k <= 40; ++k) {
    power = power * e;
    sum += ((k % 2 == 0) ? -1.0 : 1.0) / k * power;
  }
  return std::ldexp(1.0, roots) * sum;
}

GroupMatrix mat_exp(const LieElement& x) { return GroupMatrix(expm(x.matrix())); }

LieElement mat_log(const GroupMatrix& g) {
  Mat l = logm(g.mat());
  // remove the symmetric part left by rounding
  const Mat eta = MinkForm(g.n()).matrix();
  const Mat x = 0.5 * (l - eta * l.transpose() * eta);
  return LieElement(x);
}

GroupMatrix repair_orthogonality(const GroupMatrix& g) {
  if (g.eta_residual() <= 1e-8) return g;
  const Mat eta = MinkForm(g.n()).matrix();
  const Mat gi_t = g.mat().transpose().inverse();
  return GroupMatrix(0.5 * (g.mat() + eta * gi_t * eta));
}

}  // namespace kappa
