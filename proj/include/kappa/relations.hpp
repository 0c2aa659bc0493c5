#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>

#include "kappa/infgen.hpp"
#include "kappa/residual.hpp"

namespace kappa {

using Cplx = std::complex<double>;
inline constexpr Cplx kIota{0.0, 1.0};

template <class P>
using PointFn = std::function<Cplx(const P&)>;

/// One-parameter groups of bisections B exp(t x), dispatched on the groupoid.
inline GroupoidPoint advance(const Vec& x, double t, const GroupoidPoint& g) { return flow(x, t, g); }
inline AGroupoidPoint advance(const Vec& x, double t, const AGroupoidPoint& p) { return flow_a(x, t, p); }

/// Differential operator built from generators, multipliers, sums and products.
/// Generator(x) acts as i(X^r_x f + Tr(ad x|c)/2 f), X^r evaluated by central differences.
template <class P>
class SymbolOp {
 public:
  enum class Kind { LieDeriv, MultByFn, Sum, Product, Scalar };

  static SymbolOp generator(const Vec& cdot, bool with_trace = true) {
    SymbolOp op(Kind::LieDeriv);
    op.cdot_ = cdot;
    op.trace_ = with_trace ? 0.5 * tr_ad_c(static_cast<int>(cdot.size()) - 1, cdot) : 0.0;
    return op;
  }
  static SymbolOp mult(PointFn<P> f) {
    SymbolOp op(Kind::MultByFn);
    op.fn_ = std::move(f);
    return op;
  }
  static SymbolOp scalar(Cplx z) {
    SymbolOp op(Kind::Scalar);
    op.z_ = z;
    return op;
  }
  static SymbolOp identity() { return scalar(1.0); }

  Kind kind() const { return kind_; }

  SymbolOp operator+(const SymbolOp& o) const { return binary(Kind::Sum, *this, o); }
  SymbolOp operator-(const SymbolOp& o) const { return binary(Kind::Sum, *this, scalar(-1.0) * o); }
  /// Composition: (A * B) f = A(B f).
  SymbolOp operator*(const SymbolOp& o) const { return binary(Kind::Product, *this, o); }
  friend SymbolOp operator*(Cplx z, const SymbolOp& o) { return binary(Kind::Product, scalar(z), o); }

  Cplx apply(const PointFn<P>& f, const P& p, double h) const {
    switch (kind_) {
      case Kind::Scalar:
        return z_ * f(p);
      case Kind::MultByFn:
        return fn_(p) * f(p);
      case Kind::Sum:
        return lhs_->apply(f, p, h) + rhs_->apply(f, p, h);
      case Kind::Product: {
        const SymbolOp* inner = rhs_.get();
        PointFn<P> g = [inner, &f, h](const P& q) { return inner->apply(f, q, h); };
        return lhs_->apply(g, p, h);
      }
      case Kind::LieDeriv: {
        const Cplx d = (f(advance(cdot_, h, p)) - f(advance(cdot_, -h, p))) / (2 * h);
        return kIota * (trace_ != 0.0 ? d + trace_ * f(p) : d);
      }
    }
    return 0.0;
  }

 private:
  explicit SymbolOp(Kind k) : kind_(k) {}
  static SymbolOp binary(Kind k, const SymbolOp& a, const SymbolOp& b) {
    SymbolOp op(k);
    op.lhs_ = std::make_shared<const SymbolOp>(a);
    op.rhs_ = std::make_shared<const SymbolOp>(b);
    return op;
  }

  Kind kind_;
  Vec cdot_;
  double trace_ = 0.0;
  PointFn<P> fn_;
  Cplx z_ = 0.0;
  std::shared_ptr<const SymbolOp> lhs_, rhs_;
};

template <class P>
SymbolOp<P> commutator(const SymbolOp<P>& a, const SymbolOp<P>& b) {
  return a * b - b * a;
}

template <class P>
Cplx apply_op(const SymbolOp<P>& op, const PointFn<P>& f, const P& p, double h = 1e-5) {
  return op.apply(f, p, h);
}

/// Richardson combination of steps h and h/2, for nested differences.
template <class P>
Cplx apply_op_extrapolated(const SymbolOp<P>& op, const PointFn<P>& f, const P& p, double h) {
  return (4.0 * op.apply(f, p, h / 2) - op.apply(f, p, h)) / 3.0;
}

/// Chart coordinates used by the test functions: (b block, log s, y) and (z, U, log s, y).
Vec chart_coords(const GroupoidPoint& g);
Vec chart_coords(const AGroupoidPoint& p);

/// Gaussian bumps times quadratic polynomials, centred near the given point.
template <class P>
std::vector<PointFn<P>> test_functions(const P& center, int count, Rng& rng) {
  const Vec xi0 = chart_coords(center);
  const int m = static_cast<int>(xi0.size());
  std::normal_distribution<double> g;
  std::vector<PointFn<P>> out;
  for (int j = 0; j < count; ++j) {
    Vec off(m), lin(m), quad(m);
    for (int i = 0; i < m; ++i) {
      off(i) = 0.3 * g(rng);
      lin(i) = 0.5 * g(rng);
      quad(i) = 0.3 * g(rng);
    }
    const double width = 1.0 + 0.25 * j;
    const Cplx phase = std::polar(1.0, 0.4 * j);
    out.push_back([xi0, off, lin, quad, width, phase](const P& q) {
      const Vec d = chart_coords(q) - xi0;
      const double bump = std::exp(-(d - off).squaredNorm() / (2 * width * width));
      return phase * bump * (1.0 + lin.dot(d) + quad.dot(d.cwiseAbs2()));
    });
  }
  return out;
}

struct RelationConfig {
  int n = 1;
  std::uint64_t seed = 1;
  int samples = 100;
  int functions = 5;
  double h = 1e-5;   // single finite differences
  double h2 = 1e-3;  // nested finite differences
};

/// Closed forms for b_R(b; e^t, 0) and b_R(b; 1, -t y0).
BParam s_flow_closed_form(const BParam& b, double t);
BParam y_flow_closed_form(const BParam& b, const Vec& y0, double t);

/// Commutators of the flows of S, Y_k and the rotation generators, closed-form flows, anchor on Gamma_A.
Residuals check_flow_commutators(const RelationConfig& cfg);
/// Brackets of the infinitesimal generators, with and without the trace term, and on Gamma_A.
Residuals check_generator_brackets(const RelationConfig& cfg);

/// b_R(b1 a_R(b2)): the point where the coproduct of f is evaluated.
BParam coproduct_point(const BParam& b1, const BParam& b2);
/// Same point through b_R(b1 c~_L(b2)^{-1}) b2.
BParam coproduct_point_alt(const BParam& b1, const BParam& b2);
double coproduct_fn(const std::function<double(const BParam&)>& f, const BParam& b1, const BParam& b2);
/// Closed forms for the coproduct of (Lambda, u, w, alpha) in terms of b1 and b2.
BParam coproduct_closed_form(const BParam& b1, const BParam& b2);
/// Coproduct of functions on B: two forms, closed forms, unit legs, coassociativity.
Residuals check_coproduct_functions(const RelationConfig& cfg);
/// Coproducts of the generators: vector fields by finite differences, derivation rules, the generator table.
Residuals coproduct_gen(const RelationConfig& cfg);

/// The Lorentz matrix L as a function on A.
Mat l_matrix(const AParam& a);
/// Zakrzewski-type operators and their commutators on Gamma_A.
Residuals zakrzewski_bridge(const RelationConfig& cfg);
/// Coproduct, counit, antipode and bialgebra identities in the commutative group models.
Residuals hopf_group_level(const RelationConfig& cfg);

Residuals run_relations(const RelationConfig& cfg);

}  // namespace kappa
