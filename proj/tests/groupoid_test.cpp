#include <gtest/gtest.h>

#include <cmath>
#include <tuple>

#include "kappa/groupoid.hpp"

using namespace kappa;

namespace {

double maxabs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }
Vec v1(double a) { return Vec::Constant(1, a); }

double pdiff(const Mat& target, const GroupMatrix& f1, const GroupMatrix& f2) {
  return maxabs(target - (f1 * f2).mat()) / (maxabs(f1.mat()) * maxabs(f2.mat()));
}

GroupoidPoint random_point(int n, Rng& rng) { return {sample_b(n, rng), sample_c(n, rng)}; }

Mat random_reflection(int n, Rng& rng) {
  Mat K = sample_rotation(n, rng);
  K.col(0) *= -1.0;
  return K;
}

Vec gaussian(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

TEST(Groupoid, EndsExamples) {
  Rng rng(41);
  const BParam b = sample_b(2, rng);
  const auto [l, r] = gb_ends(gb_unit(b));
  EXPECT_LE(b_distance(l, b), 0.0);
  EXPECT_LE(b_distance(r, b), 1e-15);

  const GroupoidPoint g{BParam{Mat::Zero(1, 1), v1(1), v1(-1), 0.0}, CParam{2.0, v1(0)}};
  const BParam right = gb_right(g);
  EXPECT_NEAR(right.Lambda(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(right.u(0), 0.8, 1e-15);
  EXPECT_NEAR(right.w(0), -0.8, 1e-15);
  EXPECT_NEAR(right.alpha, 0.6, 1e-15);

  const GroupoidPoint inv = gb_inverse(g);
  EXPECT_LE(b_distance(inv.b, right), 1e-15);
  EXPECT_NEAR(inv.c.s, 0.5, 1e-15);
  EXPECT_NEAR(inv.c.y(0), 0.0, 1e-15);

  // Gamma_1: both ends equal the rotation block, whatever c is
  BParam rot = BParam::identity(2);
  rot.Lambda = sample_rotation(2, rng);
  const GroupoidPoint iso{rot, sample_c(2, rng)};
  EXPECT_LE(b_distance(gb_right(iso), rot), 1e-12);
}

TEST(Groupoid, Axioms) {
  Rng rng(42);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 1000; ++i) {
      const GroupoidPoint g1 = random_point(n, rng);
      const GroupoidPoint g2{gb_right(g1), sample_c(n, rng)};
      const GroupoidPoint g3{gb_right(g2), sample_c(n, rng)};
      const GroupoidPoint g12 = gb_compose(g1, g2);
      // ends of a product
      EXPECT_LE(b_distance(g12.b, g1.b), 0.0);
      EXPECT_LE(b_distance(gb_right(g12), gb_right(g2)), 1e-9);
      // associativity
      const GroupoidPoint l = gb_compose(g12, g3);
      const GroupoidPoint r = gb_compose(g1, gb_compose(g2, g3));
      EXPECT_LE(b_distance(l.b, r.b), 1e-9);
      EXPECT_LE(c_distance(l.c, r.c), 1e-9 * (1 + l.c.s));
      // units and inverses
      const GroupoidPoint u = gb_compose(g1, gb_unit(gb_right(g1)));
      EXPECT_LE(c_distance(u.c, g1.c), 0.0);
      const GroupoidPoint e = gb_compose(g1, gb_inverse(g1));
      EXPECT_LE(b_distance(e.b, g1.b), 0.0);
      EXPECT_LE(c_distance(e.c, CParam::identity(n)), 1e-12);
      const GroupoidPoint e2 = gb_compose(gb_inverse(g1), g1);
      EXPECT_LE(b_distance(e2.b, gb_right(g1)), 0.0);
      EXPECT_LE(c_distance(e2.c, CParam::identity(n)), 1e-12);
      const GroupoidPoint ii = gb_inverse(gb_inverse(g1));
      EXPECT_LE(b_distance(ii.b, g1.b), 1e-12);
      EXPECT_LE(c_distance(ii.c, g1.c), 1e-12 * (1 + g1.c.s));
    }
}

TEST(Groupoid, ComposeRejectsMismatch) {
  Rng rng(43);
  const GroupoidPoint g1 = random_point(2, rng);
  const GroupoidPoint g2 = random_point(2, rng);
  EXPECT_THROW(gb_compose(g1, g2), DomainError);
}

TEST(Groupoid, BisectionAction) {
  Rng rng(44);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 300; ++i) {
      const GroupoidPoint g = random_point(n, rng);
      const GroupoidPoint same = bisection_apply(CParam::identity(n), g);
      EXPECT_LE(b_distance(same.b, g.b), 1e-15);
      const CParam c0 = sample_c(n, rng), c1 = sample_c(n, rng);
      const GroupoidPoint h = bisection_apply(c0, g);
      // left multiplication by c_L(b c0^{-1})^{-1}
      const CParam cl = c_left(embed_b(g.b) * embed_c(c_inv(c0)));
      EXPECT_LE(pdiff(h.matrix().mat(), embed_c(c_inv(cl)), g.matrix()), 1e-12);
      // fibers of the right end are preserved
      EXPECT_LE(b_distance(gb_right(h), gb_right(g)), 1e-9);
      // left action of C
      const GroupoidPoint twice = bisection_apply(c1, bisection_apply(c0, g));
      const GroupoidPoint once = bisection_apply(c_mul(c1, c0), g);
      EXPECT_LE(b_distance(twice.b, once.b), 1e-9);
      EXPECT_LE(c_distance(twice.c, once.c), 1e-9 * (1 + once.c.s));
    }
}

TEST(Groupoid, Classification) {
  Rng rng(45);
  BParam rot = BParam::identity(3);
  rot.Lambda = sample_rotation(3, rng);
  const Classification c1 = classify({rot, sample_c(3, rng)});
  EXPECT_EQ(c1.orbit, Orbit::Gamma1);
  EXPECT_TRUE(c1.ends_equal);
  EXPECT_EQ(c1.isotropy_dim, 4);

  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 100; ++i) {
      const BParam b = sample_b(n, rng);
      const double s = std::exp(std::uniform_real_distribution<double>(-2, 2)(rng));
      const Classification c = classify({b, isotropy_element(b, s)});
      EXPECT_EQ(c.orbit, Orbit::Gamma0);
      EXPECT_TRUE(c.ends_equal);
      EXPECT_EQ(c.isotropy_dim, 1);
      EXPECT_FALSE(classify({b, CParam{s * 1.1 + 0.1, isotropy_element(b, s).y}}).ends_equal);
    }
  const Classification c0 = classify({BParam{Mat::Zero(1, 1), v1(1), v1(-1), 0.0}, CParam{2.0, v1(0)}});
  EXPECT_FALSE(c0.in_bprime);
}

TEST(Groupoid, GammaZeroIsClosed) {
  Rng rng(46);
  for (int i = 0; i < 100; ++i) {
    const GroupoidPoint g = random_point(2, rng);
    ASSERT_EQ(classify(g).orbit, Orbit::Gamma0);
    EXPECT_EQ(classify(gb_inverse(g)).orbit, Orbit::Gamma0);
    const GroupoidPoint h = gb_compose(g, {gb_right(g), sample_c(2, rng)});
    EXPECT_EQ(classify(h).orbit, Orbit::Gamma0);
  }
}

TEST(Groupoid, Charts) {
  Rng rng(47);
  for (int n = 1; n <= 3; ++n) {
    const Mat K = random_reflection(n, rng);
    const BParam b0 = phi_chart(K, Vec::Zero(n));
    EXPECT_LE(maxabs(b0.Lambda - K), 1e-15);
    EXPECT_EQ(b0.alpha, -1.0);
    EXPECT_LE(b0.u.cwiseAbs().maxCoeff() + b0.w.cwiseAbs().maxCoeff(), 0.0);
    for (int i = 0; i < 300; ++i) {
      const Mat K1 = random_reflection(n, rng);
      const Vec v = gaussian(n, rng);
      const BParam b = phi_chart(K1, v);
      EXPECT_LE(b_constraint_residual(b), 1e-12);
      const auto [K2, v2] = psi_chart(b);
      EXPECT_LE(maxabs(K2 - K1), 1e-10);
      EXPECT_LE((v2 - v).cwiseAbs().maxCoeff(), 1e-10 * (1 + v.squaredNorm()));
      const BParam r = sample_b(n, rng);
      EXPECT_NEAR(psi_chart(r).first.determinant(), -1.0, 1e-9);
      const BParam back = phi_chart(psi_chart(r).first, psi_chart(r).second);
      EXPECT_LE(b_distance(back, r), 1e-9);
    }
  }
  EXPECT_THROW(psi_chart(BParam::identity(2)), DomainError);
  EXPECT_THROW(phi_chart(Mat::Identity(2, 2), Vec::Zero(2)), DomainError);
}

TEST(Groupoid, Gamma00Swap) {
  Rng rng(48);
  for (int n = 1; n <= 3; ++n) {
    const Mat K = random_reflection(n, rng);
    const Vec v = gaussian(n, rng);
    const Gamma00Swap id = gamma00_swap(K, v, CParam::identity(n));
    EXPECT_LE((id.v_right - v).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(id.ct.s, 1.0, 1e-14);
    EXPECT_LE(id.ct.y.cwiseAbs().maxCoeff(), 1e-14);
    // transitivity with s = 1, y = v - v'
    const Vec target = gaussian(n, rng);
    EXPECT_LE((gamma00_action(v, CParam{1.0, v - target}) - target).cwiseAbs().maxCoeff(), 1e-14);
    for (int i = 0; i < 300; ++i) {
      const Mat K1 = random_reflection(n, rng);
      const Vec x = gaussian(n, rng);
      const CParam c = sample_c(n, rng);
      const Gamma00Swap sw = gamma00_swap(K1, x, c);
      const Mat lhs = (embed_b(phi_chart(K1, x)) * embed_c(c)).mat();
      EXPECT_LE(pdiff(lhs, embed_c(sw.ct), embed_b(phi_chart(K1, sw.v_right))), 1e-12);
      // agrees with the general swap
      const CBFactors f = swap_bc_to_cb(phi_chart(K1, x), c);
      EXPECT_NEAR(f.c.s, sw.ct.s, 1e-10 * f.c.s);
      EXPECT_LE(b_distance(f.b, phi_chart(K1, sw.v_right)), 1e-9);
    }
  }
}

TEST(Groupoid, Gamma00Split) {
  Rng rng(49);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 200; ++i) {
      const Vec x = gaussian(n, rng);
      auto [vu, cu] = gamma00_split(1.0, x, x);
      EXPECT_EQ(cu.s, 1.0);
      EXPECT_LE(cu.y.cwiseAbs().maxCoeff(), 0.0);
      const double s1 = std::exp(gaussian(1, rng)(0)), s2 = std::exp(gaussian(1, rng)(0));
      const Vec x1 = gaussian(n, rng), x2 = gaussian(n, rng), x3 = gaussian(n, rng);
      auto [va, ca] = gamma00_split(s1, x1, x2);
      auto [vb, cb] = gamma00_split(s2, x2, x3);
      // composable in the transformation groupoid and composite matches the pair groupoid
      EXPECT_LE((gamma00_action(va, ca) - vb).cwiseAbs().maxCoeff(), 1e-12);
      auto [vp, cp] = gamma00_split(s1 * s2, x1, x3);
      const CParam prod = c_mul(ca, cb);
      EXPECT_LE((vp - va).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_LE(c_distance(prod, cp), 1e-12 * (1 + prod.s + cp.y.norm()));
      auto [s, y1, y2] = gamma00_unsplit(va, ca);
      EXPECT_NEAR(s, s1, 1e-15);
      EXPECT_LE((y1 - x1).cwiseAbs().maxCoeff() + (y2 - x2).cwiseAbs().maxCoeff(), 1e-12);
      // the whole Gamma_0 chart round-trips
      const GroupoidPoint g = random_point(n, rng);
      const GroupoidPoint back = from_gamma0(gamma0_coords(g));
      EXPECT_LE(b_distance(back.b, g.b), 1e-9);
      EXPECT_LE(c_distance(back.c, g.c), 1e-9 * (1 + g.c.s));
      // x2 is the right end in the chart
      EXPECT_LE((psi_chart(gb_right(g)).second - gamma0_coords(g).x2).cwiseAbs().maxCoeff(),
                1e-8 * (1 + gamma0_coords(g).x2.norm()));
    }
}

TEST(Groupoid, GammaAIsomorphism) {
  for (int n = 1; n <= 3; ++n) {
    const AParam e{Vec::Zero(n), Mat::Identity(n, n), 1};
    Rng r0(50);
    const CParam c = sample_c(n, r0);
    const GroupoidPoint img = gamma_a_to_b({e, c});
    EXPECT_LE(b_distance(img.b, BParam::identity(n)), 0.0);
  }
  Rng rng(51);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 1000; ++i) {
      const AGroupoidPoint p1{sample_a(n, rng), sample_c(n, rng)};
      const GroupoidPoint q1 = gamma_a_to_b(p1);
      const AGroupoidPoint back = gamma_b_to_a(q1);
      EXPECT_LE(a_distance(back.a, p1.a), 1e-9);
      EXPECT_LE(c_distance(back.c, p1.c), 0.0);
      // ends correspond
      EXPECT_LE(b_distance(gb_right(q1), a_factor(ga_right(p1)).b), 1e-9);
      // composition is intertwined
      const AGroupoidPoint p2{ga_right(p1), sample_c(n, rng)};
      const GroupoidPoint lhs = gamma_a_to_b(ga_compose(p1, p2));
      const GroupoidPoint rhs = gb_compose(q1, gamma_a_to_b(p2));
      EXPECT_LE(b_distance(lhs.b, rhs.b), 1e-9);
      EXPECT_LE(c_distance(lhs.c, rhs.c), 1e-9 * (1 + lhs.c.s));
      // Gamma_A axioms
      const AGroupoidPoint p3{ga_right(p2), sample_c(n, rng)};
      const AGroupoidPoint a1 = ga_compose(ga_compose(p1, p2), p3);
      const AGroupoidPoint a2 = ga_compose(p1, ga_compose(p2, p3));
      EXPECT_LE(c_distance(a1.c, a2.c), 1e-9 * (1 + a1.c.s));
      const AGroupoidPoint ident = ga_compose(p1, ga_inverse(p1));
      EXPECT_LE(c_distance(ident.c, CParam::identity(n)), 1e-12);
      EXPECT_LE(a_distance(ga_right(ga_inverse(p1)), p1.a), 1e-8);
      // bisections match across the isomorphism
      const CParam c0 = sample_c(n, rng);
      const GroupoidPoint via_a = gamma_a_to_b(ga_bisection_apply(c0, p1));
      const GroupoidPoint via_b = bisection_apply(c0, q1);
      EXPECT_LE(b_distance(via_a.b, via_b.b), 1e-8);
      EXPECT_LE(c_distance(via_a.c, via_b.c), 1e-9 * (1 + via_b.c.s));
    }
}

TEST(Groupoid, TransformationGroupoid) {
  Rng rng(52);
  for (int n = 1; n <= 3; ++n) {
    BParam rot = BParam::identity(n);
    rot.Lambda = sample_rotation(n, rng);
    for (int i = 0; i < 1000; ++i) {
      const BParam b = sample_b(n, rng);
      const CParam c1 = sample_c(n, rng), c2 = sample_c(n, rng);
      EXPECT_LE(b_distance(trans_action(b, CParam::identity(n)), b), 1e-15);
      const BParam lhs = trans_action(trans_action(b, c1), c2);
      EXPECT_LE(b_distance(lhs, trans_action(b, c_mul(c1, c2))), 1e-9);
      // orbits through SO(n) are points
      EXPECT_LE(b_distance(trans_action(rot, c1), rot), 1e-12);
    }
  }
}
