#include <gtest/gtest.h>

#include "eqindex/center_manifold.hpp"
#include "oracles.hpp"

using namespace eqindex;

namespace {

ProblemSpec sinx_spec(int N) {
  ProblemSpec s;
  s.truncation = N;
  s.a = FourierVector(1);
  s.a[1] = std::sqrt(M_PI);
  return s;
}

ProblemSpec cubic_spec(int N) {
  ProblemSpec s;
  s.truncation = N;
  NonlinearTerm t;
  t.power = 3;
  t.coefficient = FourierVector(0);
  t.coefficient[0] = -std::sqrt(2.0 * M_PI);  // c(x) = -1
  s.h_terms = {t};
  return s;
}

ProblemSpec random_spec(Lcg& rng, int N) {
  ProblemSpec s;
  s.truncation = N;
  s.a = oracle::random_fourier(rng, 3, 0.8);
  NonlinearTerm t;
  t.power = 3;
  t.coefficient = oracle::random_fourier(rng, 2, 0.5);
  s.h_terms = {t};
  return s;
}

/// w_ij and v_ij by quadrature of a e_i e_j followed by the diagonal inverse of L on X2.
FourierVector v_oracle(const ProblemSpec& s, int k, TrigMode mi, TrigMode mj) {
  const int N = s.truncation;
  FourierVector w = oracle::project([&](double x) { return oracle::eval(s.a, x) * mi.value(x) * mj.value(x); }, N);
  FourierVector v(N);
  for (int i = 0; i < w.size(); ++i) {
    const TrigMode m = TrigMode::from_index(i);
    if (m.n == k) continue;
    v[i] = w[i] / (m.eigenvalue() - double(k) * k);
  }
  return v;
}

}  // namespace

TEST(Manifold, KernelBasis) {
  const auto k0 = kernel_basis(6, 0);
  ASSERT_EQ(k0.size(), 1u);
  EXPECT_EQ(k0[0][0], 1.0);
  const auto k2 = kernel_basis(6, 2);
  ASSERT_EQ(k2.size(), 2u);
  EXPECT_EQ(k2[0][(TrigMode{2, Parity::sine}.index())], 1.0);
  EXPECT_EQ(k2[1][(TrigMode{2, Parity::cosine}.index())], 1.0);
  EXPECT_THROW(kernel_basis(2, 3), ValidationError);
}

TEST(Manifold, SinxCoefficientClosedForm) {
  const QuadraticManifold mf = quadratic_coefficients(sinx_spec(16), 1);
  // a e1^2 = (3 sin x - sin 3x) / (4 pi); only the sin 3x part survives P2.
  const int s3 = TrigMode{3, Parity::sine}.index();
  EXPECT_NEAR(mf.v1()[s3], -1.0 / (32.0 * std::sqrt(M_PI)), 1e-10);
  FourierVector rest = mf.v1();
  rest[s3] = 0.0;
  EXPECT_LT(rest.norm(), 1e-14);
}

TEST(Manifold, CoefficientsMatchQuadratureOracle) {
  Lcg rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    const ProblemSpec s = random_spec(rng, 10);
    for (int k : {0, 1, 2}) {
      const QuadraticManifold mf = quadratic_coefficients(s, k);
      std::vector<TrigMode> modes;
      if (k == 0)
        modes = {{0, Parity::constant}};
      else
        modes = {{k, Parity::sine}, {k, Parity::cosine}};
      for (int i = 0; i < mf.dim(); ++i)
        for (int j = 0; j < mf.dim(); ++j) EXPECT_LT((mf.v(i, j) - v_oracle(s, k, modes[i], modes[j])).norm(), 1e-12);
    }
  }
}

TEST(Manifold, InvarianceEquationHolds) {
  // L v_ij = w_ij and w_ij is orthogonal to the kernel.
  Lcg rng(47);
  const ProblemSpec s = random_spec(rng, 8);
  const QuadraticManifold mf = quadratic_coefficients(s, 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_LT((apply_L(mf.v(i, j), 1.0) - mf.w(i, j)).norm(), 1e-12);
      for (const auto& e : mf.kernel()) EXPECT_NEAR(inner_product(mf.w(i, j), e), 0.0, 1e-14);
    }
}

TEST(Manifold, LiftAndCoordinates) {
  const QuadraticManifold mf = quadratic_coefficients(sinx_spec(8), 1);
  const Vector c{{0.03, -0.05}};
  EXPECT_LT((mf.kernel_coordinates(mf.lift(c)) - c).norm(), 1e-15);
  // dphi by finite differences.
  const auto d = mf.dphi(c);
  for (int j = 0; j < 2; ++j) {
    Vector cp = c, cm = c;
    cp[j] += 1e-6;
    cm[j] -= 1e-6;
    EXPECT_LT(((mf.phi(cp) - mf.phi(cm)) * (0.5e6) - d[j]).norm(), 1e-9);
  }
}

TEST(ReducedField, QuadraticPartMatchesQuadrature) {
  const ProblemSpec s = sinx_spec(12);
  const ReducedField rf(s, 1);
  EXPECT_NEAR(rf.b(0, 0, 0), 3.0 / (4.0 * std::sqrt(M_PI)), 1e-12);
  Lcg rng(53);
  const ProblemSpec r = random_spec(rng, 10);
  const ReducedField rr(r, 2);
  const TrigMode e[2] = {{2, Parity::sine}, {2, Parity::cosine}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        const double ref = oracle::integrate(
            [&](double x) { return oracle::eval(r.a, x) * e[j].value(x) * e[l].value(x) * e[i].value(x); });
        EXPECT_NEAR(rr.b(i, j, l), ref, 1e-12);
      }
}

TEST(ReducedField, FieldAndJacobian) {
  Lcg rng(59);
  const ProblemSpec s = random_spec(rng, 8);
  const ReducedField rf(s, 1);
  const Vector c{{0.04, 0.02}};
  const double lambda = 1.1;
  // Reduced vector field: (lambda - k^2) c + P1 g(u1 + phi).
  const FourierVector u = rf.manifold().lift(c);
  const FourierVector g = oracle::project(
      [&](double x) {
        const double ux = oracle::eval(u, x);
        return oracle::eval(s.a, x) * ux * ux + oracle::eval(s.h_terms[0].coefficient, x) * std::pow(ux, 3);
      },
      8);
  const Vector f = rf(c, lambda);
  EXPECT_NEAR(f[0], 0.1 * c[0] + g[(TrigMode{1, Parity::sine}.index())], 1e-12);
  EXPECT_NEAR(f[1], 0.1 * c[1] + g[(TrigMode{1, Parity::cosine}.index())], 1e-12);
  const Matrix J = rf.jacobian(c, lambda);
  const Matrix Jfd = oracle::fd_jacobian([&](const Vector& x) { return rf(x, lambda); }, c);
  EXPECT_LT((J - Jfd).norm(), 1e-8);
  // Quadratic part is the leading term.
  const Vector tiny = 1e-4 * c;
  EXPECT_LT((rf(tiny, 1.0) - rf.quadratic(tiny)).norm(), 1e-3 * tiny.squaredNorm());
  const auto [f1, f2] = reduced_vector_field(rf, c[0], c[1], lambda);
  EXPECT_EQ(f1, f[0]);
  EXPECT_EQ(f2, f[1]);
}

TEST(OrderCheck, SlopeAtLeastThreeOnExampleSpecs) {
  const std::vector<double> radii{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  const auto a = residual_order_check(sinx_spec(16), 1, radii);
  EXPECT_GE(a.slope, 2.9);
  EXPECT_FALSE(a.identically_zero);
  const auto b = residual_order_check(cubic_spec(16), 1, radii);
  EXPECT_GE(b.slope, 2.9);
}

TEST(OrderCheck, PropertyOnRandomSpecs) {
  Lcg rng(61);
  const std::vector<double> radii{5e-2, 2e-2, 1e-2, 5e-3};
  for (int trial = 0; trial < 8; ++trial) {
    const ProblemSpec s = random_spec(rng, 10);
    for (int k : {0, 1, 2}) {
      const auto r = residual_order_check(s, k, radii);
      EXPECT_GE(r.slope, 2.9) << "trial " << trial << " k " << k;
    }
  }
}

TEST(OrderCheck, DefectVanishesWithoutNonlinearity) {
  ProblemSpec s;
  s.truncation = 6;
  const auto r = residual_order_check(s, 1, {1e-1, 1e-2});
  EXPECT_TRUE(r.identically_zero);
  EXPECT_TRUE(std::isinf(r.slope));
}

TEST(OrderCheck, WrongManifoldIsRejected) {
  const ProblemSpec s = sinx_spec(12);
  QuadraticManifold mf = quadratic_coefficients(s, 1);
  mf.v_mut(0, 0) = FourierVector(12);  // drop the quadratic correction
  try {
    residual_order_check(s, mf, {1e-1, 1e-2, 1e-3});
    FAIL() << "expected OrderCheckFailure";
  } catch (const OrderCheckFailure& e) {
    EXPECT_NEAR(e.slope(), 2.0, 0.1);
    EXPECT_EQ(e.table().size(), 3u);
  }
  EXPECT_THROW(residual_order_check(s, 1, {1e-2}), ValidationError);
  EXPECT_THROW(residual_order_check(s, 1, {1e-2, 1e-1}), ValidationError);
  EXPECT_THROW(residual_order_check(s, 1, {1e-2, 1e-6}), ValidationError);
}

TEST(Definiteness, SinxForms) {
  const ReducedField rf(sinx_spec(12), 1);
  const Definiteness d1 = bilinear_definiteness(rf, 1);
  const Definiteness d2 = bilinear_definiteness(rf, 2);
  // B1 = diag(3, 1) / (4 sqrt(pi)); B2 has zero diagonal.
  EXPECT_TRUE(d1.definite);
  EXPECT_NEAR(d1.gamma, 1.0 / (4.0 * std::sqrt(M_PI)), 1e-12);
  EXPECT_FALSE(d2.definite);
  EXPECT_THROW(bilinear_definiteness(rf, 3), ValidationError);
  EXPECT_THROW(bilinear_definiteness(ReducedField(sinx_spec(12), 0), 1), DimensionError);
}

TEST(Dominance, QuadraticPartControlsSmallCircles) {
  const ReducedField rf(sinx_spec(12), 1);
  const DominanceCheck d = quadratic_dominance(rf, 0.05);
  EXPECT_TRUE(d.applicable);
  EXPECT_TRUE(d.ok);
  // min |B| over the circle scales like r^2, the remainder like r^3.
  const DominanceCheck e = quadratic_dominance(rf, 0.025);
  EXPECT_NEAR(d.min_quadratic / e.min_quadratic, 4.0, 1e-9);
  EXPECT_NEAR(d.max_remainder / e.max_remainder, 8.0, 0.2);
  // No quadratic term: the check does not apply.
  ProblemSpec c;
  c.truncation = 6;
  NonlinearTerm t;
  t.power = 3;
  t.coefficient = FourierVector(0);
  t.coefficient[0] = -1.0;
  c.h_terms = {t};
  const DominanceCheck z = quadratic_dominance(ReducedField(c, 1), 0.05);
  EXPECT_FALSE(z.applicable);
  EXPECT_TRUE(z.ok);
  EXPECT_THROW(quadratic_dominance(rf, 0.0), ValidationError);
}
