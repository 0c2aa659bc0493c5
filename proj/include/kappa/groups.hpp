#pragma once

#include <cstdint>
#include <random>

#include "kappa/minkalg.hpp"

namespace kappa {

using Rng = std::mt19937_64;

/// Element of the extended Lorentz group A: boost z (|z|<1), rotation U, sign d.
struct AParam {
  Vec z;
  Mat U;
  int d = 1;
  int n() const { return static_cast<int>(z.size()); }
};

/// Element of SO(n+1) written as [[Lambda, u], [w^T, alpha]].
struct BParam {
  Mat Lambda;
  Vec u;
  Vec w;
  double alpha = 1.0;
  int n() const { return static_cast<int>(u.size()); }
  static BParam identity(int n);
  /// The (n+1)x(n+1) rotation block.
  Mat block() const;
  static BParam from_block(const Mat& r);
};

/// Element (s, y) of C = R_+ x| R^n.
struct CParam {
  double s = 1.0;
  Vec y;
  int n() const { return static_cast<int>(y.size()); }
  static CParam identity(int n) { return {1.0, Vec::Zero(n)}; }
};

/// Chart of the Lie algebra of C: (sdot, ydot) = -sdot c0 + sum ydot_k c_k.
struct CLieParam {
  double sdot = 0.0;
  Vec ydot;
  int n() const { return static_cast<int>(ydot.size()); }
};

void validate(const AParam& a, double tol = 1e-10);
void validate(const BParam& b, double tol = 1e-10);
void validate(const CParam& c);
/// Largest violation of the block identities of SO(n+1).
double b_constraint_residual(const BParam& b);

GroupMatrix embed_a(const AParam& a);
AParam recover_a(const GroupMatrix& g, double tol = 1e-9);
GroupMatrix embed_b(const BParam& b);
BParam recover_b(const GroupMatrix& g, double tol = 1e-9);
GroupMatrix embed_c(const CParam& c);
CParam recover_c(const GroupMatrix& g, double tol = 1e-9);

CParam c_mul(const CParam& c1, const CParam& c2);
CParam c_inv(const CParam& c);
BParam b_mul(const BParam& b1, const BParam& b2);
BParam b_inv(const BParam& b);
AParam a_mul(const AParam& a1, const AParam& a2);
AParam a_inv(const AParam& a);

/// Basis of the Lie algebra of C: c0 = M_{0,n+1}, c_k = M_{k,n+1} - M_{k,0}.
LieElement c_basis(int n, int k);
LieElement to_algebra(const CLieParam& x);
/// Coordinates (sdot, ydot) of an element known to lie in the Lie algebra of C.
CLieParam from_algebra(const LieElement& x);
/// Coefficients x_k of sum x_k c_k; index 0 is c0.
Vec c_coords(const CLieParam& x);
CLieParam from_c_coords(const Vec& v);

CParam exp_c(const CLieParam& x);
CLieParam log_c(const CParam& c);

/// (e^x - 1)/x and log(x)/(x - 1) with their removable singularities filled in.
double expm1_over(double x);
double log_over(double x);

AParam sample_a(int n, Rng& rng);
BParam sample_b(int n, Rng& rng);
CParam sample_c(int n, Rng& rng);
/// Haar sample of SO(m).
Mat sample_rotation(int m, Rng& rng);

enum class Kind { A, B, C, G };
GroupMatrix sample_element(Kind kind, int n, std::uint64_t seed);

}  // namespace kappa
