#include <gtest/gtest.h>

#include <cmath>

#include "kappa/groups.hpp"

using namespace kappa;

namespace {

double maxabs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Groups, EmbedAExamples) {
  for (int n = 1; n <= 3; ++n) {
    AParam a{Vec::Zero(n), Mat::Identity(n, n), 1};
    EXPECT_EQ(embed_a(a).mat(), Mat::Identity(n + 2, n + 2));
    a.d = -1;
    Vec diag = Vec::Ones(n + 2);
    diag(n) = -1;
    diag(n + 1) = -1;
    EXPECT_EQ(embed_a(a).mat(), Mat(diag.asDiagonal()));
  }
  const AParam a{v1(0.6), Mat::Identity(1, 1), 1};
  const Mat g = embed_a(a).mat();
  EXPECT_NEAR(g(0, 0), 2.125, 1e-14);
  EXPECT_NEAR(g(1, 0), 1.875, 1e-14);
  EXPECT_EQ(g(2, 0), 0.0);
  EXPECT_LE(embed_a(a).eta_residual(), 1e-12);
}

TEST(Groups, EmbedARejects) {
  EXPECT_THROW(embed_a(AParam{v1(1.0), Mat::Identity(1, 1), 1}), DomainError);
  Mat u = Mat::Identity(2, 2);
  u(0, 1) = 0.1;
  EXPECT_THROW(embed_a(AParam{Vec::Zero(2), u, 1}), DomainError);
  EXPECT_THROW(embed_a(AParam{Vec::Zero(2), Mat::Identity(2, 2), 0}), DomainError);
}

TEST(Groups, RecoverARoundTrip) {
  Rng rng(21);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 200; ++i) {
      const AParam a = sample_a(n, rng);
      const GroupMatrix g = embed_a(a);
      EXPECT_LE(g.eta_residual(), 1e-10);
      EXPECT_NEAR(g.mat().determinant(), 1.0, 1e-10);
      const AParam r = recover_a(g);
      EXPECT_LE((r.z - a.z).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE(maxabs(r.U - a.U), 1e-11);
      EXPECT_EQ(r.d, a.d);
    }
}

TEST(Groups, ANormalizesLorentzBlock) {
  Rng rng(22);
  for (int n = 1; n <= 3; ++n) {
    const GroupMatrix a = embed_a(sample_a(n, rng));
    const GroupMatrix l = embed_a(sample_a(n, rng));  // any element of the block shape
    const Mat conj = (a * l * a.inverse()).mat();
    EXPECT_LE(conj.row(n + 1).head(n + 1).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(conj.col(n + 1).head(n + 1).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(std::abs(conj(n + 1, n + 1)), 1.0, 1e-10);
  }
}

TEST(Groups, EmbedBExamples) {
  EXPECT_EQ(embed_b(BParam::identity(2)).mat(), Mat::Identity(4, 4));
  const BParam b{Mat::Zero(1, 1), v1(1), v1(-1), 0.0};
  Mat expect(3, 3);
  expect << 1, 0, 0, 0, 0, 1, 0, -1, 0;
  EXPECT_EQ(embed_b(b).mat(), expect);
  BParam bad = b;
  bad.u(0) = 0.9;
  EXPECT_THROW(embed_b(bad), DomainError);
}

TEST(Groups, SampledBSatisfiesBlockIdentities) {
  Rng rng(23);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 200; ++i) {
      const BParam b = sample_b(n, rng);
      EXPECT_LE(b_constraint_residual(b), 1e-12);
      EXPECT_NEAR(b.Lambda.determinant(), b.alpha, 1e-12);
      const GroupMatrix g = embed_b(b);
      EXPECT_LE(g.eta_residual(), 1e-10);
      const BParam r = recover_b(g);
      EXPECT_EQ(r.block(), b.block());
    }
}

TEST(Groups, EmbedCExamples) {
  EXPECT_EQ(embed_c(CParam::identity(3)).mat(), Mat::Identity(5, 5));
  const Mat g = embed_c(CParam{2.0, v1(0.0)}).mat();
  EXPECT_DOUBLE_EQ(g(0, 0), 1.25);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(g(2, 0), 0.75);
  EXPECT_THROW(embed_c(CParam{0.0, v1(0)}), DomainError);
  EXPECT_THROW(embed_c(CParam{-1.0, v1(0)}), DomainError);
}

TEST(Groups, CProductAndInverse) {
  const CParam p = c_mul(CParam{2.0, v2(1, 0)}, CParam{3.0, v2(0, 1)});
  EXPECT_DOUBLE_EQ(p.s, 6.0);
  EXPECT_EQ(p.y, v2(3, 1));
  const Mat m = (embed_c(CParam{2.0, v2(1, 0)}) * embed_c(CParam{3.0, v2(0, 1)})).mat();
  EXPECT_LE(maxabs(m - embed_c(p).mat()), 1e-14);

  Rng rng(24);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 200; ++i) {
      const CParam c1 = sample_c(n, rng), c2 = sample_c(n, rng);
      const Mat lhs = embed_c(c_mul(c1, c2)).mat();
      const Mat rhs = (embed_c(c1) * embed_c(c2)).mat();
      EXPECT_LE(maxabs(lhs - rhs), 1e-10 * (1 + maxabs(lhs)));
      const CParam e = c_mul(c1, c_inv(c1));
      EXPECT_NEAR(e.s, 1.0, 1e-14);
      EXPECT_LE(e.y.cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_LE(maxabs(embed_c(c_inv(c1)).mat() - embed_c(c1).inverse().mat()), 1e-10 * (1 + maxabs(lhs)));
      const CParam r = recover_c(embed_c(c1));
      EXPECT_NEAR(r.s, c1.s, 1e-12 * c1.s);
      EXPECT_LE((r.y - c1.y).cwiseAbs().maxCoeff(), 1e-12);
      const CParam id = c_mul(CParam::identity(n), c1);
      EXPECT_EQ(id.s, c1.s);
      EXPECT_EQ(id.y, c1.y);
    }
}

TEST(Groups, ExpLogOnC) {
  const CParam e = exp_c(CLieParam{0.0, Vec::Zero(2)});
  EXPECT_EQ(e.s, 1.0);
  EXPECT_EQ(e.y, Vec::Zero(2));
  const CLieParam l = log_c(CParam{std::exp(1.0), v2(1.0, -2.0)});
  EXPECT_NEAR(l.sdot, 1.0, 1e-15);
  EXPECT_LE((l.ydot - v2(1.0, -2.0) / (std::exp(1.0) - 1)).cwiseAbs().maxCoeff(), 1e-15);

  Rng rng(25);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 300; ++i) {
      CLieParam x{g(rng), Vec::Zero(n)};
      for (int k = 0; k < n; ++k) x.ydot(k) = g(rng);
      // exercise the expansions near the removable singularities
      if (i % 3 == 1) x.sdot *= 1e-5;
      if (i % 3 == 2) x.sdot *= 1e-9;
      const CLieParam back = log_c(exp_c(x));
      EXPECT_NEAR(back.sdot, x.sdot, 1e-12);
      EXPECT_LE((back.ydot - x.ydot).cwiseAbs().maxCoeff(), 1e-12);
      CParam c = sample_c(n, rng);
      if (i % 3 == 1) c.s = 1.0 + 3e-5 * g(rng);
      const CParam again = exp_c(log_c(c));
      EXPECT_NEAR(again.s, c.s, 1e-12 * c.s);
      EXPECT_LE((again.y - c.y).cwiseAbs().maxCoeff(), 1e-12);

      // the chart agrees with the matrix exponential of -sdot c0 + sum ydot_k c_k
      const Mat viaexp = mat_exp(to_algebra(x)).mat();
      EXPECT_LE(maxabs(viaexp - embed_c(exp_c(x)).mat()), 1e-9 * (1 + maxabs(viaexp)));
      // and the factorized form (s, y) = exp(-log s c0) exp(M(y))
      const LieElement my = to_algebra(CLieParam{0.0, c.y});
      const Mat fact = (mat_exp(-std::log(c.s) * gen_basis(n, 0, n + 1)) * mat_exp(my)).mat();
      EXPECT_LE(maxabs(fact - embed_c(c).mat()), 1e-9 * (1 + maxabs(fact)));
    }
}

TEST(Groups, AlgebraChartRoundTrip) {
  Rng rng(26);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 3; ++n) {
    CLieParam x{g(rng), Vec::Zero(n)};
    for (int k = 0; k < n; ++k) x.ydot(k) = g(rng);
    const CLieParam back = from_algebra(to_algebra(x));
    EXPECT_NEAR(back.sdot, x.sdot, 1e-15);
    EXPECT_LE((back.ydot - x.ydot).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(from_c_coords(c_coords(x)).ydot, x.ydot);
  }
}

TEST(Groups, SamplingIsDeterministic) {
  for (Kind k : {Kind::A, Kind::B, Kind::C, Kind::G}) {
    EXPECT_EQ(sample_element(k, 3, 99).mat(), sample_element(k, 3, 99).mat());
    EXPECT_LE(sample_element(k, 3, 99).eta_residual(), 1e-10);
  }
  EXPECT_NE(sample_element(Kind::G, 2, 1).mat(), sample_element(Kind::G, 2, 2).mat());
}

TEST(Groups, SmallAlphaIsRare) {
  Rng rng(27);
  int small = 0;
  for (int i = 0; i < 10000; ++i)
    if (std::abs(sample_b(2, rng).alpha) < 0.01) ++small;
  // alpha is the last entry of a uniform unit vector in R^3, P(|alpha| < 0.01) = 0.01
  EXPECT_LT(small, 200);
}
