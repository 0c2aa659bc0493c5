#pragma once

#include "kappa/groups.hpp"

namespace kappa {

/// g = b c
struct BCFactors {
  BParam b;
  CParam c;
  double M = 1.0;  // scale factor of the swap that produced it, 1 for readouts
};

/// g = c b
struct CBFactors {
  CParam c;
  BParam b;
  double M = 1.0;
};

/// g = c a
struct CAFactors {
  CParam c;
  AParam a;
};

/// g = a c
struct ACFactors {
  AParam a;
  CParam c;
};

/// |alpha| below this is treated as outside B'.
inline constexpr double kBPrimeGuard = 1e-12;

/// Solve b c = c~ b~ for (c~, b~).
CBFactors swap_bc_to_cb(const BParam& b, const CParam& c);
/// Solve c~ b~ = b c for (b, c).
BCFactors swap_cb_to_bc(const CParam& ct, const BParam& bt);

/// Both closed forms of the swap scale M, (w - (1-alpha)y/s) form and expanded form.
double swap_scale(const BParam& b, const CParam& c);
double swap_scale_alt(const BParam& b, const CParam& c);
double swap_scale_inverse(const CParam& ct, const BParam& bt);
double swap_scale_inverse_alt(const CParam& ct, const BParam& bt);
/// Factored product form of Lambda~ (undefined at alpha = 1).
Mat swap_lambda_factored(const BParam& b, const CParam& c);
/// Lambda - u w^T/(alpha - 1), conserved by the swap.
Mat swap_invariant(const BParam& b);

BCFactors factor_bc(const GroupMatrix& g);
CBFactors factor_cb(const GroupMatrix& g);
CAFactors factor_ca(const GroupMatrix& g, double tol = 1e-9);
ACFactors factor_ac(const GroupMatrix& g, double tol = 1e-9);

/// a = c b with b = b_R(a).
CBFactors a_factor(const AParam& a);
/// b = c~_L(b) a_R(b), defined on B' = {alpha != 0}.
CAFactors ca_project(const BParam& b);
CParam c_tilde_left(const BParam& b);
AParam a_right(const BParam& b);

struct CPair {
  CParam c;   // right factor next to b1
  CParam ct;  // left factor next to b2
};
/// Find c, c~ with b1 c = c~ b2 when the swap invariant of b1 and b2 agree (s fixed to 1).
CPair recover_pair(const BParam& b1, const BParam& b2, double tol = 1e-8);

// projections of a raw group element
BParam b_left(const GroupMatrix& g);
CParam c_right(const GroupMatrix& g);
CParam c_left(const GroupMatrix& g);
BParam b_right(const GroupMatrix& g);
CParam c_tilde_left(const GroupMatrix& g);
AParam a_right(const GroupMatrix& g);

/// b_R(b c), the right end of bc in the groupoid over B.
BParam b_right(const BParam& b, const CParam& c);

}  // namespace kappa
