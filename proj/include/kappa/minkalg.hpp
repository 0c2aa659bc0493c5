#pragma once

#include <Eigen/Dense>
#include <utility>

#include "kappa/errors.hpp"

namespace kappa {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Signature (+,-,...,-) on R^{n+2}.
struct MinkForm {
  int n;
  Vec eta;

  explicit MinkForm(int n);
  int size() const { return n + 2; }
  Mat matrix() const { return eta.asDiagonal(); }
};

/// Dimension of so(1,n+1).
int lie_dim(int n);
/// Position of M_{ab} (a<b) in the lexicographic basis.
int basis_index(int n, int a, int b);
std::pair<int, int> basis_pair(int n, int idx);

/// Element of so(eta), stored as an (n+2)x(n+2) matrix.
class LieElement {
 public:
  LieElement() = default;
  explicit LieElement(Mat m);
  static LieElement zero(int n);
  static LieElement from_coeffs(int n, const Vec& c);

  int n() const { return static_cast<int>(m_.rows()) - 2; }
  const Mat& matrix() const { return m_; }
  Vec coeffs() const;
  /// max |X^T eta + eta X|
  double antisymmetry_residual() const;

  LieElement operator+(const LieElement& o) const;
  LieElement operator-(const LieElement& o) const;
  LieElement operator-() const { return LieElement(-m_); }
  LieElement operator*(double a) const { return LieElement(a * m_); }
  friend LieElement operator*(double a, const LieElement& x) { return x * a; }

 private:
  Mat m_;
};

/// Element of O(eta). The checked factory enforces g^T eta g = eta and det = 1.
class GroupMatrix {
 public:
  GroupMatrix() = default;
  explicit GroupMatrix(Mat m) : m_(std::move(m)) {}
  static GroupMatrix identity(int n);
  static GroupMatrix checked(Mat m, double tol = 1e-10);

  int n() const { return static_cast<int>(m_.rows()) - 2; }
  const Mat& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  GroupMatrix operator*(const GroupMatrix& o) const { return GroupMatrix(m_ * o.m_); }
  /// eta g^T eta
  GroupMatrix inverse() const;
  double eta_residual() const;
  bool in_identity_component() const { return m_(0, 0) >= 1.0 - 1e-12; }

 private:
  Mat m_;
};

LieElement gen_basis(int n, int a, int b);
/// v (x) eta(w) - w (x) eta(v)
LieElement bivector(const Vec& v, const Vec& w);

LieElement bracket(const LieElement& x, const LieElement& y);
/// Invariant form k(M_xy, M_zt) = eta(x,t)eta(y,z) - eta(x,z)eta(y,t).
double form_k(const LieElement& x, const LieElement& y);
/// Dual form on coefficient vectors of g*, inverse to k.
double form_ktilde(int n, const Vec& phi, const Vec& psi);
/// Coefficients of k(X, .) in the dual basis.
Vec k_flat(const LieElement& x);

LieElement adjoint(const GroupMatrix& g, const LieElement& x);
/// Matrix of Ad(g) on coefficient vectors.
Mat adjoint_matrix(const GroupMatrix& g);

GroupMatrix mat_exp(const LieElement& x);
LieElement mat_log(const GroupMatrix& g);

/// Plain dense exponential/logarithm used by the two above.
Mat expm(const Mat& a);
Mat logm(const Mat& a);

/// One polar-type Newton step when the eta residual exceeds 1e-8.
GroupMatrix repair_orthogonality(const GroupMatrix& g);

}  // namespace kappa
