#include <gtest/gtest.h>

#include <cmath>

#include "kappa/infgen.hpp"

using namespace kappa;

namespace {

double maxabs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }
Vec v1(double a) { return Vec::Constant(1, a); }

Vec unit(int n, int k) { return Vec::Unit(n + 1, k); }

Vec gaussian(int m, Rng& rng) {
  std::normal_distribution<double> g;
  Vec v(m);
  for (int i = 0; i < m; ++i) v(i) = g(rng);
  return v;
}

Mat eta_a(int n) {
  Mat e = -Mat::Identity(n + 1, n + 1);
  e(0, 0) = 1;
  return e;
}

// tangent relative to the size of the point, to keep large group elements comparable
double rel(const LieElement& x, const LieElement& y) {
  return maxabs(x.matrix() - y.matrix()) / std::max(1.0, maxabs(y.matrix()));
}

}  // namespace

TEST(Infgen, IdentityAndTrace) {
  for (int n = 1; n <= 3; ++n) {
    const ProjAd p = ad_proj(GroupMatrix::identity(n));
    EXPECT_LE(maxabs(p.adB - Mat::Identity(n * (n + 1) / 2, n * (n + 1) / 2)), 1e-14);
    EXPECT_LE(maxabs(p.adC - Mat::Identity(n + 1, n + 1)), 1e-14);
    EXPECT_LE(maxabs(p.adCtilde - Mat::Identity(n + 1, n + 1)), 1e-14);
    const Modular m = modular(GroupMatrix::identity(n));
    EXPECT_NEAR(m.jB, 1.0, 1e-14);
    EXPECT_NEAR(m.jC, 1.0, 1e-14);
    EXPECT_NEAR(tr_ad_c(n, unit(n, 0)), n, 1e-14);
    for (int k = 1; k <= n; ++k) EXPECT_NEAR(tr_ad_c(n, unit(n, k)), 0.0, 1e-14);
  }
}

TEST(Infgen, ProjectionsSplit) {
  for (int n = 1; n <= 3; ++n) {
    const Projections& p = projections(n);
    const int dim = lie_dim(n);
    const Mat id = Mat::Identity(dim, dim);
    EXPECT_LE(maxabs(p.basis_b * p.coord_b + p.basis_c * p.coord_c - id), 1e-13);
    EXPECT_LE(maxabs(p.basis_a * p.coord_a + p.basis_c * p.coord_ct - id), 1e-13);
    // P_c kills b, P~_c kills a
    EXPECT_LE(maxabs(p.coord_c * p.basis_b), 1e-14);
    EXPECT_LE(maxabs(p.coord_ct * p.basis_a), 1e-14);
  }
}

TEST(Infgen, Representation) {
  Rng rng(7);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 50; ++i) {
      const GroupMatrix b1 = embed_b(sample_b(n, rng)), b2 = embed_b(sample_b(n, rng));
      const ProjAd p1 = ad_proj(b1), p2 = ad_proj(b2), p12 = ad_proj(b1 * b2);
      EXPECT_LE(maxabs(p12.adB - p1.adB * p2.adB), 1e-9);
      EXPECT_LE(maxabs(p12.adC - p1.adC * p2.adC), 1e-9);
      EXPECT_NEAR(modular(b1 * b2).jC, modular(b1).jC * modular(b2).jC, 1e-9);

      const GroupMatrix c1 = embed_c(sample_c(n, rng)), c2 = embed_c(sample_c(n, rng));
      const ProjAd q1 = ad_proj(c1), q2 = ad_proj(c2), q12 = ad_proj(c1 * c2);
      EXPECT_LE(maxabs(q12.adC - q1.adC * q2.adC) / maxabs(q12.adC), 1e-12);
      EXPECT_NEAR(modular(c1 * c2).jC / (modular(c1).jC * modular(c2).jC), 1.0, 1e-9);
    }
  }
}

TEST(Infgen, ModularOnC) {
  // j_C(s, y) = s^{-n}
  Rng rng(8);
  for (int n = 1; n <= 3; ++n) {
    const CParam c = sample_c(n, rng);
    EXPECT_NEAR(modular(embed_c(c)).jC * std::pow(c.s, n), 1.0, 1e-10);
  }
}

TEST(Infgen, WMatrixExamples) {
  const AParam e{Vec::Zero(2), Mat::Identity(2, 2), 1};
  EXPECT_LE(maxabs(w_matrix(e) - Mat::Identity(3, 3)), 1e-15);

  const BParam b{Mat::Constant(1, 1, 0.6), v1(0.8), v1(-0.8), 0.6};
  Mat expect(2, 2);
  expect << 5.0 / 3, -4.0 / 3, -4.0 / 3, 5.0 / 3;
  EXPECT_LE(maxabs(w_of_b(b) - expect), 1e-14);
  EXPECT_LE(maxabs(w_matrix(a_right(b)) - expect), 1e-12);

  BParam bad = b;
  bad.alpha = 0.0;
  EXPECT_THROW(w_of_b(bad), DomainError);
}

TEST(Infgen, WMatrixProperties) {
  Rng rng(9);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      const AParam a1 = sample_a(n, rng), a2 = sample_a(n, rng);
      const Mat W1 = w_matrix(a1), W2 = w_matrix(a2);
      EXPECT_LE(maxabs(W1.transpose() * eta_a(n) * W1 - eta_a(n)) / maxabs(W1 * W1.transpose()), 1e-13);
      const Mat W12 = w_matrix(a_mul(a1, a2));
      EXPECT_LE(maxabs(W12 - W1 * W2) / maxabs(W12), 1e-9);
      // the matrix of the projected adjoint in the c basis
      EXPECT_LE(maxabs(ad_c_tilde(embed_a(a1)) - W1) / maxabs(W1), 1e-10);

      const BParam b = sample_b(n, rng);
      if (std::abs(b.alpha) < 1e-3) continue;
      const Mat Wb = w_of_b(b);
      EXPECT_LE(maxabs(Wb - w_matrix(a_right(b))) / maxabs(Wb), 1e-9);
    }
  }
}

TEST(Infgen, AdjointOnCBasisMatchesContragredient) {
  // Ad(a) on span{M_{b,n+1}} is the same matrix as P~_c Ad(a) on the c basis,
  // and as the contragredient action on the k-duals of that basis
  Rng rng(10);
  for (int n = 1; n <= 3; ++n) {
    const int N = n + 1, dim = lie_dim(n);
    Mat E(dim, N), R(dim, N);
    for (int b = 0; b <= n; ++b) {
      E.col(b) = gen_basis(n, b, N).coeffs();
      R.col(b) = k_flat(gen_basis(n, b, N));
    }
    for (int i = 0; i < 20; ++i) {
      const AParam a = sample_a(n, rng);
      const GroupMatrix g = embed_a(a);
      const Mat ad = adjoint_matrix(g);
      const Mat on_e = E.completeOrthogonalDecomposition().solve(ad * E);
      EXPECT_LE(maxabs(ad * E - E * on_e) / maxabs(ad), 1e-12);  // invariant subspace
      const Mat coad = ad.inverse().transpose();
      const Mat on_r = R.completeOrthogonalDecomposition().solve(coad * R);
      const Mat W = w_matrix(a);
      EXPECT_LE(maxabs(on_e - W) / maxabs(W), 1e-10);
      EXPECT_LE(maxabs(on_r - W) / maxabs(W), 1e-10);
    }
  }
}

TEST(Infgen, RightInvariantFieldMatchesFlow) {
  Rng rng(11);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      const GroupoidPoint g{sample_b(n, rng), sample_c(n, rng)};
      for (int k = 0; k <= n; ++k) {
        const Vec x = unit(n, k);
        const LieElement fd =
            fd_tangent([&](double t) { return flow(x, t, g).matrix(); }, 1e-5);
        EXPECT_LE(rel(fd, riv_field(x, g).vec), 1e-6) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Infgen, RightInvariantFieldOnGammaA) {
  Rng rng(12);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      const AGroupoidPoint p{sample_a(n, rng), sample_c(n, rng)};
      for (int k = 0; k <= n; ++k) {
        const Vec x = unit(n, k);
        const LieElement fd =
            fd_tangent([&](double t) { return flow_a(x, t, p).matrix(); }, 1e-5, true);
        EXPECT_LE(rel(fd, riv_field_a(x, p).vec), 1e-6) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Infgen, FieldBasics) {
  Rng rng(13);
  const int n = 2;
  const GroupoidPoint e{BParam::identity(n), sample_c(n, rng)};
  const Vec x = gaussian(n + 1, rng), y = gaussian(n + 1, rng);
  EXPECT_LE(maxabs(riv_field(x, e).vec.matrix() - c_element(n, x).matrix()), 1e-14);
  EXPECT_LE(maxabs(anchor(x, BParam::identity(n)).matrix()), 1e-14);

  const GroupoidPoint g{sample_b(n, rng), sample_c(n, rng)};
  const Mat lhs = riv_field(2 * x + y, g).vec.matrix();
  const Mat rhs = 2 * riv_field(x, g).vec.matrix() + riv_field(y, g).vec.matrix();
  EXPECT_LE(maxabs(lhs - rhs), 1e-13);
  const Mat alhs = anchor(2 * x + y, g.b).matrix();
  EXPECT_LE(maxabs(alhs - 2 * anchor(x, g.b).matrix() - anchor(y, g.b).matrix()), 1e-13);
}

TEST(Infgen, AnchorMatchesFlow) {
  Rng rng(14);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      const GroupoidPoint g{sample_b(n, rng), sample_c(n, rng)};
      const AParam a = sample_a(n, rng);
      for (int k = 0; k <= n; ++k) {
        const Vec x = unit(n, k);
        const LieElement fd =
            fd_tangent([&](double t) { return embed_b(flow(x, t, g).b); }, 1e-5);
        const LieElement an = anchor(x, g.b);
        EXPECT_LE(rel(fd, an), 1e-6);
        // values in b: the row and column 0 vanish
        EXPECT_LE(maxabs(an.matrix().row(0)) + maxabs(an.matrix().col(0)), 1e-14);

        const AGroupoidPoint p{a, CParam::identity(n)};
        const LieElement fda =
            fd_tangent([&](double t) { return embed_a(flow_a(x, t, p).a); }, 1e-5, true);
        const LieElement ana = anchor_a(x, a);
        EXPECT_LE(rel(fda, ana), 1e-6);
        EXPECT_LE(maxabs(ana.matrix().row(n + 1)) + maxabs(ana.matrix().col(n + 1)), 1e-12);
      }
    }
  }
}

TEST(Infgen, BisectionImageDelta0) {
  Rng rng(15);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      const PointPair p{{sample_b(n, rng), sample_c(n, rng)}, {sample_b(n, rng), sample_c(n, rng)}};
      const CParam c0 = sample_c(n, rng);
      const PointPair r = bisection_image(c0, Coproduct::Delta0, p);
      const GroupMatrix m1 = p.first.matrix(), m2 = p.second.matrix();
      const GroupMatrix c0m = embed_c(c0), c0i = embed_c(c_inv(c0));
      // c_L^{-1}(b1 c_L(b2 c0^-1)) b1 c1, c_L^{-1}(b2 c0^-1) b2 c2
      const GroupMatrix cl2 = embed_c(c_left(embed_b(p.second.b) * c0i));
      const GroupMatrix cl1 = embed_c(c_left(embed_b(p.first.b) * cl2));
      const Mat f1 = (cl1.inverse() * m1).mat(), f2 = (cl2.inverse() * m2).mat();
      // c_R(c_R(c0 b2^-1) b1^-1) b1 c1, c_R(c0 b2^-1) b2 c2
      const GroupMatrix cr2 = embed_c(c_right(c0m * embed_b(p.second.b).inverse()));
      const GroupMatrix cr1 = embed_c(c_right(cr2 * embed_b(p.first.b).inverse()));
      const Mat h1 = (cr1 * m1).mat(), h2 = (cr2 * m2).mat();
      const Mat r1 = r.first.matrix().mat(), r2 = r.second.matrix().mat();
      const double s1 = maxabs(r1), s2 = maxabs(r2);
      EXPECT_LE(maxabs(r1 - f1) / s1, 1e-9);
      EXPECT_LE(maxabs(r2 - f2) / s2, 1e-9);
      EXPECT_LE(maxabs(r1 - h1) / s1, 1e-9);
      EXPECT_LE(maxabs(r2 - h2) / s2, 1e-9);
    }
  }
}

TEST(Infgen, BisectionImageDelta) {
  Rng rng(16);
  for (int n = 1; n <= 3; ++n) {
    for (int i = 0; i < 100; ++i) {
      const PointPair p{{sample_b(n, rng), sample_c(n, rng)}, {sample_b(n, rng), sample_c(n, rng)}};
      const CParam c0 = sample_c(n, rng);
      if (std::abs(p.second.b.alpha) < 1e-3) continue;
      PointPair r;
      try {
        r = bisection_image(c0, Coproduct::Delta, p);
      } catch (const DomainError&) {
        continue;
      }
      const GroupoidPoint right = bisection_apply(c0, p.second);
      EXPECT_LE(b_distance(r.second.b, right.b), 1e-12);
      EXPECT_LE(c_distance(r.second.c, right.c), 1e-12);
      // oracle for c~_L(b2 c0^-1) from the CA readout of the raw product
      const CParam x = c_tilde_left_of(p.second.b, c_inv(c0));
      const CParam y = c_tilde_left(embed_b(p.second.b) * embed_c(c_inv(c0)));
      EXPECT_LE(c_distance(x, y) / std::max(1.0, std::abs(x.s) + x.y.norm()), 1e-9);
    }
  }
}

TEST(Infgen, BisectionImageTrivial) {
  Rng rng(17);
  const int n = 2;
  const PointPair p{{sample_b(n, rng), sample_c(n, rng)}, {sample_b(n, rng), sample_c(n, rng)}};
  for (Coproduct w : {Coproduct::Delta0, Coproduct::Delta}) {
    const PointPair r = bisection_image(CParam::identity(n), w, p);
    EXPECT_LE(b_distance(r.first.b, p.first.b), 1e-12);
    EXPECT_LE(c_distance(r.first.c, p.first.c), 1e-12);
    EXPECT_LE(b_distance(r.second.b, p.second.b), 1e-12);
    EXPECT_LE(c_distance(r.second.c, p.second.c), 1e-12);
  }
  PointPair bad = p;
  bad.second.b.alpha = 0.0;
  EXPECT_THROW(bisection_image(CParam::identity(n), Coproduct::Delta, bad), DomainError);
}
