#pragma once

#include <cstdint>
#include <vector>

#include "kappa/convalg.hpp"
#include "kappa/relations.hpp"

namespace kappa {

/// Coordinates D_k of log_C(c~_L(b)) in the basis c0, c1..cn. Closed form with
/// the removable singularity at |alpha| = 1 expanded.
Vec d_coeffs(const BParam& b);
/// Same coordinates read off log_c(c~_L(b)).
Vec d_coeffs_log(const BParam& b);

/// c_t(b) = exp_C(-t log_C(c~_L(b))).
CParam twist_c(const BParam& b, double t);
/// (|alpha|^{-t}, sgn(alpha) (|alpha|^{-t} - 1)/(1 - |alpha|) u), written out directly.
CParam twist_c_closed(const BParam& b, double t);

/// Left multiplication by the bisection T_t: the first leg is moved by the
/// bisection of c_t(b_L(second)), the second leg is left alone. t = 1 is the twist T.
PointPair twist_apply(double t, const PointPair& p);

/// (T_t F)(g1, g2) = F(T_{-t}(g1, g2)) j_C(c_t(b_L(g2)))^{-1/2}
PairFn twist_unitary(const PairFn& F, double t);
/// i (X_T F - Tr(ad log_C c~_L(b2))|c F / 2), with X_T by central differences along T_t.
Cplx twist_generator_apply(const PairFn& F, const PointPair& p, double h);
/// -sum_k A_k acting on the first leg, times D_k(b2).
Cplx twist_generator_factored(const PairFn& F, const PointPair& p, double h);
/// S (x) log|alpha| + sum_k Y_k (x) sgn(alpha) log|alpha| u_k/(|alpha| - 1).
Cplx twist_generator_closed(const PairFn& F, const PointPair& p, double h);

struct TwistConfig {
  int n = 1;
  std::uint64_t seed = 1;
  int samples = 1000;
  int functions = 5;
  double h = 1e-5;
};

/// Group law of T_t, t = 1 against the explicit twist, the generating vector field, D consistency.
Residuals twist_group_checks(const TwistConfig& cfg);
/// Section properties of T, (id x d0)T, (d0 x id)T and the cocycle identity as a set equality.
Residuals cocycle_check(const TwistConfig& cfg);
/// Graph membership of the transposed multiplication of Gamma_C in the twisted relation,
/// and the twisted bisection action as T d0(B c0) T^{-1}.
Residuals delta_twisted_check(const TwistConfig& cfg);
/// The generator of T_t in its three forms and against the flow of twist_unitary.
Residuals twist_generator_check(const TwistConfig& cfg);

// ---- measure of the set where b_R(b c) b1 comes close to B \ B' ----

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);
/// eps log(M)/delta * 4 n F(n)/(delta - eps)^n
double measure_bound(int n, double M, double delta, double eps);

struct MeasureConfig {
  int n = 1;
  double M = 10.0;
  double delta = 0.5;
  double eps = 0.05;
  int samples = 100000;  // per (b, b1) pair
  int pairs = 8;
  std::uint64_t seed = 1;
};

struct MeasureReport {
  double estimate = 0.0;  // largest estimate over the sampled pairs
  double margin = 0.0;    // 99% half-width for that pair
  double bound = 0.0;
  double worst_alpha1 = 0.0;
  long hits = 0;
  bool within() const { return estimate + margin <= bound; }
};

/// Throws DomainError unless M > 1 and 0 < eps < delta < 1.
MeasureReport measure_bound_check(const MeasureConfig& cfg);

struct BallDescription {
  Vec y_big, y_small;
  double r_big = 0.0, r_small = 0.0;
};
/// For fixed s, the y-section of the set is the big ball minus the small one.
BallDescription measure_balls(const BParam& b, const BParam& b1, double s, double eps);

/// Bound checks over a (M, delta) x eps grid and the fitted exponent of the estimate in eps.
struct MeasureGridResult {
  std::vector<MeasureConfig> configs;
  std::vector<MeasureReport> reports;
  std::vector<double> exponents;  // one per (M, delta)
};
MeasureGridResult measure_grid(int n, const std::vector<std::pair<double, double>>& m_delta,
                               const std::vector<double>& eps_over_delta, int samples, int pairs,
                               std::uint64_t seed);
/// Residuals for a grid: every bound, and |exponent - 1| <= 0.2.
Residuals measure_residuals(const MeasureGridResult& g);
/// Two-ball description, ball containment, and the empty set for alpha = 1.
Residuals measure_geometry_check(int n, std::uint64_t seed, int samples);

// ---- coactions on C ----

/// s^{i lambda}
Cplx character(double lambda, const CParam& c);
/// Coaction identities, flip, morphism property, the affine base action, the twisted
/// section identity and the twisted right coaction.
Residuals minkowski_action(const TwistConfig& cfg);

/// All of the above except the measure grid.
Residuals run_twist(const TwistConfig& cfg);

}  // namespace kappa
