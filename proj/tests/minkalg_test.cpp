#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kappa/groups.hpp"
#include "kappa/minkalg.hpp"

using namespace kappa;

namespace {

double eta(int i) { return i == 0 ? 1.0 : -1.0; }

// four-term bracket of two basis elements, written independently of the matrix code
Vec bracket_oracle(int n, int x, int y, int z, int t) {
  Vec c = Vec::Zero(lie_dim(n));
  auto add = [&](double f, int a, int b) {
    if (a == b || f == 0.0) return;
    if (a < b)
      c(basis_index(n, a, b)) += f;
    else
      c(basis_index(n, b, a)) -= f;
  };
  auto e = [](int a, int b) { return a == b ? eta(a) : 0.0; };
  add(e(x, t), y, z);
  add(e(y, z), x, t);
  add(-e(x, z), y, t);
  add(-e(y, t), x, z);
  return c;
}

LieElement random_lie(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Vec c(lie_dim(n));
  for (int i = 0; i < c.size(); ++i) c(i) = scale * g(rng);
  return LieElement::from_coeffs(n, c);
}

// plain Taylor sum without scaling, fine for small norms
Mat series_exp(const Mat& a) {
  Mat term = Mat::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 60; ++k) {
    term = term * a / k;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(Minkalg, BasisMatricesFromDefinition) {
  // M_01 e_0 = -e_1 and M_01 e_1 = -e_0 with eta(e_1,e_1) = -1
  Mat m01(3, 3);
  m01 << 0, -1, 0, -1, 0, 0, 0, 0, 0;
  EXPECT_EQ(gen_basis(1, 0, 1).matrix(), m01);
  Mat m12(3, 3);
  m12 << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_EQ(gen_basis(1, 1, 2).matrix(), m12);
  EXPECT_THROW(gen_basis(1, 1, 1), std::out_of_range);
  EXPECT_THROW(gen_basis(1, 2, 1), std::out_of_range);
  EXPECT_THROW(gen_basis(1, 0, 3), std::out_of_range);
}

TEST(Minkalg, BasisMatchesBivector) {
  for (int n = 1; n <= 3; ++n)
    for (int a = 0; a < n + 2; ++a)
      for (int b = a + 1; b < n + 2; ++b) {
        Vec ea = Vec::Unit(n + 2, a), eb = Vec::Unit(n + 2, b);
        EXPECT_EQ(gen_basis(n, a, b).matrix(), bivector(ea, eb).matrix());
      }
}

TEST(Minkalg, CoefficientRoundTrip) {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 4; ++n) {
    const LieElement x = random_lie(n, rng);
    EXPECT_EQ(LieElement::from_coeffs(n, x.coeffs()).matrix(), x.matrix());
    EXPECT_LE(x.antisymmetry_residual(), 1e-15);
  }
  EXPECT_EQ(basis_index(2, 0, 1), 0);
  EXPECT_EQ(basis_index(2, 0, 3), 2);
  EXPECT_EQ(basis_index(2, 1, 2), 3);
  EXPECT_EQ(basis_index(2, 2, 3), 5);
  for (int i = 0; i < lie_dim(3); ++i) {
    auto [a, b] = basis_pair(3, i);
    EXPECT_EQ(basis_index(3, a, b), i);
  }
}

TEST(Minkalg, BracketMatchesFourTermFormula) {
  for (int n = 1; n <= 3; ++n) {
    const int N = n + 2;
    for (int x = 0; x < N; ++x)
      for (int y = x + 1; y < N; ++y)
        for (int z = 0; z < N; ++z)
          for (int t = z + 1; t < N; ++t) {
            const Vec got = bracket(gen_basis(n, x, y), gen_basis(n, z, t)).coeffs();
            EXPECT_LE((got - bracket_oracle(n, x, y, z, t)).cwiseAbs().maxCoeff(), 1e-15);
          }
  }
}

TEST(Minkalg, BracketExamples) {
  for (int n = 1; n <= 3; ++n) {
    for (int k = 1; k <= n; ++k) {
      const LieElement got = bracket(gen_basis(n, 0, n + 1), c_basis(n, k));
      EXPECT_LE((got.matrix() - c_basis(n, k).matrix()).cwiseAbs().maxCoeff(), 1e-15);
      for (int l = 1; l <= n; ++l)
        EXPECT_LE(bracket(c_basis(n, k), c_basis(n, l)).matrix().cwiseAbs().maxCoeff(), 1e-15);
    }
  }
  const LieElement m = bracket(gen_basis(1, 0, 1), gen_basis(1, 1, 2));
  EXPECT_EQ(m.matrix(), (-gen_basis(1, 0, 2)).matrix());
  std::mt19937_64 rng(3);
  const LieElement x = random_lie(2, rng);
  EXPECT_EQ(bracket(x, x).matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Minkalg, Jacobi) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 50; ++i) {
      const LieElement x = random_lie(n, rng), y = random_lie(n, rng), z = random_lie(n, rng);
      const LieElement j = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
      EXPECT_LE(j.matrix().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Minkalg, InvariantForm) {
  for (int n = 1; n <= 3; ++n) {
    EXPECT_DOUBLE_EQ(form_k(gen_basis(n, 0, n + 1), gen_basis(n, 0, n + 1)), 1.0);
    for (int k = 1; k <= n; ++k) EXPECT_DOUBLE_EQ(form_k(gen_basis(n, k, n + 1), gen_basis(n, k, n + 1)), -1.0);
  }
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 20; ++i) {
      const LieElement x = random_lie(n, rng), y = random_lie(n, rng);
      EXPECT_DOUBLE_EQ(form_k(x, y), form_k(y, x));
      // k is half the trace form on so(eta)
      EXPECT_NEAR(form_k(x, y), 0.5 * (x.matrix() * y.matrix()).trace(), 1e-12);
      EXPECT_NEAR(form_ktilde(n, k_flat(x), k_flat(y)), form_k(x, y), 1e-12);
      const GroupMatrix g = mat_exp(random_lie(n, rng, 0.7));
      EXPECT_NEAR(form_k(adjoint(g, x), adjoint(g, y)), form_k(x, y), 1e-9);
    }
}

TEST(Minkalg, AdjointOnBivectors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 20; ++i) {
      const GroupMatrix g = mat_exp(random_lie(n, rng, 0.8));
      Vec v(n + 2), w(n + 2);
      for (int j = 0; j < n + 2; ++j) {
        v(j) = gauss(rng);
        w(j) = gauss(rng);
      }
      const Mat lhs = adjoint(g, bivector(v, w)).matrix();
      const Mat rhs = bivector(g.mat() * v, g.mat() * w).matrix();
      EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
      const Vec via_matrix = adjoint_matrix(g) * bivector(v, w).coeffs();
      EXPECT_LE((via_matrix - LieElement(rhs).coeffs()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Minkalg, ExpLog) {
  EXPECT_EQ(mat_exp(LieElement::zero(2)).mat(), Mat::Identity(4, 4));
  for (double t : {-1.3, 0.2, 2.5}) {
    const Mat e = mat_exp(t * gen_basis(2, 0, 3)).mat();
    EXPECT_NEAR(e(0, 0), std::cosh(t), 1e-13 * std::cosh(t));
    EXPECT_NEAR(e(3, 3), std::cosh(t), 1e-13 * std::cosh(t));
    EXPECT_NEAR(e(0, 3), -std::sinh(t), 1e-13 * std::cosh(t));
    EXPECT_NEAR(e(3, 0), -std::sinh(t), 1e-13 * std::cosh(t));
    EXPECT_NEAR(e(1, 1), 1.0, 1e-14);
  }
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i < 30; ++i) {
      LieElement x = random_lie(n, rng);
      x = x * (std::uniform_real_distribution<double>(0.05, 1.0)(rng) / x.coeffs().norm());
      const GroupMatrix g = mat_exp(x);
      EXPECT_LE(g.eta_residual(), 1e-10);
      EXPECT_LE((g.mat() - series_exp(x.matrix())).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((mat_log(g).matrix() - x.matrix()).cwiseAbs().maxCoeff(), 1e-9);
      // larger arguments go through squaring
      const GroupMatrix big = mat_exp(x * 6.0);
      EXPECT_LE(big.eta_residual(), 1e-10 * big.mat().squaredNorm());
    }
}

TEST(Minkalg, LogRejectsNegativeAxis) {
  // rotation by pi in a spatial plane has eigenvalue -1 twice
  const GroupMatrix g = mat_exp(M_PI * gen_basis(2, 1, 2));
  EXPECT_THROW(mat_log(g), DomainError);
}

TEST(Minkalg, GroupMatrixChecks) {
  EXPECT_THROW(GroupMatrix::checked(2.0 * Mat::Identity(3, 3)), DomainError);
  Mat p = Mat::Identity(3, 3);
  p(1, 1) = -1;
  EXPECT_THROW(GroupMatrix::checked(p), DomainError);
  std::mt19937_64 rng(17);
  const GroupMatrix g = mat_exp(random_lie(2, rng));
  EXPECT_LE((g * g.inverse()).mat().isIdentity(1e-10) ? 0.0 : 1.0, 0.0);
  EXPECT_TRUE(g.in_identity_component());
}

TEST(Minkalg, RepairOrthogonality) {
  std::mt19937_64 rng(19);
  const GroupMatrix g = mat_exp(random_lie(3, rng, 0.5));
  Mat noisy = g.mat();
  noisy(1, 2) += 1e-6;
  noisy(0, 4) -= 2e-6;
  const GroupMatrix bad(noisy);
  ASSERT_GT(bad.eta_residual(), 1e-8);
  const GroupMatrix fixed = repair_orthogonality(bad);
  EXPECT_LT(fixed.eta_residual(), 1e-10);
  // clean input is returned unchanged
  EXPECT_EQ(repair_orthogonality(g).mat(), g.mat());
}
