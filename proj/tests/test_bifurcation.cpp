#include <gtest/gtest.h>

#include "eqindex/bifurcation.hpp"
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
  t.coefficient[0] = -std::sqrt(2.0 * M_PI);
  s.h_terms = {t};
  return s;
}

/// Scalar system u g(u, lambda) with the given nontrivial zero set g = 0.
ParamSystem scalar_system(std::function<double(double, double)> g, std::function<double(double, double)> gu,
                          std::function<double(double, double)> gl, std::vector<double> eigenvalues) {
  ParamSystem p;
  p.dim = 1;
  p.residual = [g](const Vector& u, double l) { return Vector::Constant(1, u[0] * g(u[0], l)); };
  p.jacobian = [g, gu](const Vector& u, double l) { return Matrix::Constant(1, 1, g(u[0], l) + u[0] * gu(u[0], l)); };
  p.dlambda = [gl](const Vector& u, double l) { return Vector::Constant(1, u[0] * gl(u[0], l)); };
  p.trivial_eigenvalues = std::move(eigenvalues);
  return p;
}

Branch trace(const ParamSystem& sys, double lambda, double guess) {
  const auto u = solve_at_lambda(sys, Vector::Constant(1, guess), lambda, 1e-12);
  EXPECT_TRUE(u.has_value());
  BranchPoint p;
  p.u = *u;
  p.lambda = lambda;
  Vector dir(2);
  dir << (*u)[0], 0.0;
  ContinuationOptions o;
  o.h_max = 0.02;
  return continue_branch(sys, p, dir, 1.0, o);
}

}  // namespace

TEST(IndexFormula, TableAndTrivialIndexJump) {
  EXPECT_EQ(index_formula(0, 1, 1, Side::left), 0);
  EXPECT_EQ(index_formula(0, 1, 1, Side::right), 2);
  EXPECT_EQ(index_formula(1, 2, 0, Side::left), 1);
  EXPECT_EQ(index_formula(1, 2, -1, Side::right), 2);
  // Left minus right is the jump of the trivial index across lambda0.
  for (int m1 = 0; m1 < 4; ++m1)
    for (int m2 = 1; m2 <= 3; ++m2)
      for (int chi = -2; chi <= 2; ++chi)
        EXPECT_EQ(index_formula(m1, m2, chi, Side::left) - index_formula(m1, m2, chi, Side::right),
                  parity_sign(m1) * (parity_sign(m2) - 1));
}

TEST(OriginConley, ExampleSpecs) {
  const auto s = origin_conley(sinx_spec(8), 1);
  EXPECT_EQ(s.m1, 1);
  EXPECT_EQ(s.m2, 2);
  EXPECT_EQ(s.chi, 0);
  EXPECT_EQ(s.classification, BlockReport::Classification::neither);
  const auto c = origin_conley(cubic_spec(8), 1);
  EXPECT_EQ(c.chi, 1);
  EXPECT_EQ(c.classification, BlockReport::Classification::attractor);
  // Simple kernel at 0 with quadratic nonlinearity: transcritical origin.
  ProblemSpec q;
  q.truncation = 6;
  q.a = FourierVector(0);
  q.a[0] = std::sqrt(2.0 * M_PI);
  const auto z = origin_conley(q, 0);
  EXPECT_EQ(z.m1, 0);
  EXPECT_EQ(z.m2, 1);
  EXPECT_EQ(z.chi, 0);
  EXPECT_TRUE(s.dominance.ok);
  EXPECT_FALSE(c.dominance.applicable);
  BifurcationOptions wide;
  wide.block_radius = 0.2;
  EXPECT_THROW(origin_conley(sinx_spec(8), 1, wide), ValidationError);
}

TEST(SetIndex, FormulaAgreesWithShellCount) {
  for (Side side : {Side::left, Side::right}) {
    const auto s = bifurcating_set_index(sinx_spec(8), 1, side);
    EXPECT_EQ(s.formula, 1);
    EXPECT_EQ(s.shell.index, 1);
    const auto c = bifurcating_set_index(cubic_spec(8), 1, side);
    EXPECT_EQ(c.formula, 0);
    EXPECT_EQ(c.shell.index, 0);
  }
  // The O(2) circle on the right splits under the symmetry-breaking term.
  const auto c = bifurcating_set_index(cubic_spec(8), 1, Side::right);
  EXPECT_GT(c.shell.symmetry_breaking, 0.0);
  EXPECT_GE(c.shell.zeros, 2);
}

TEST(LocalBranch, SinxConfirmedOnBothSides) {
  const auto r = local_branch_existence(sinx_spec(8), 1);
  EXPECT_TRUE(r.left);
  EXPECT_TRUE(r.right);
  ASSERT_GE(r.confirmations.size(), 2u);
  for (const auto& c : r.confirmations) EXPECT_TRUE(c.found);
  // Each epsilon of the halving schedule confirms on its own.
  for (double eps : {0.05, 0.025, 0.0125})
    for (double sign : {-1.0, 1.0}) EXPECT_FALSE(nontrivial_equilibria(sinx_spec(8), 1, 1.0 + sign * eps, 0.6).empty());
}

TEST(LocalBranch, BranchAmplitudeIsLinearInEpsilon) {
  // Transcritical branch: |u| ~ c |lambda - 1|.
  const ProblemSpec s = sinx_spec(10);
  std::vector<double> eps, norms;
  for (double e : {0.04, 0.02, 0.01}) {
    const auto zs = nontrivial_equilibria(s, 1, 1.0 + e, 0.6);
    ASSERT_FALSE(zs.empty());
    double n = 1e300;
    for (const auto& z : zs) n = std::min(n, z.norm());
    eps.push_back(e);
    norms.push_back(n);
  }
  EXPECT_NEAR(oracle::loglog_slope(eps, norms), 1.0, 0.05);
}

TEST(Continuation, CubicBranchesAreUnbounded) {
  BifurcationOptions o;
  o.continuation.R_max = 3.0;
  const auto bs = continue_galerkin_branches(cubic_spec(6), 1, o);
  ASSERT_FALSE(bs.empty());
  for (const auto& b : bs) {
    EXPECT_EQ(b.termination, Termination::unbounded) << b.diagnostics;
    // Residual by quadrature at the last point, and r^2 = 4 pi (lambda - 1) / 3 near the start.
    const auto& p = b.points.back();
    const FourierVector u(6, p.u);
    const FourierVector cube = oracle::project([&](double x) { return std::pow(oracle::eval(u, x), 3); }, 6);
    for (int i = 0; i < u.size(); ++i) {
      const int n = TrigMode::from_index(i).n;
      EXPECT_NEAR((n * n - p.lambda) * u[i] + cube[i], 0.0, 1e-8);
      if (TrigMode::from_index(i).parity == Parity::sine) {
        EXPECT_EQ(u[i], 0.0);
      }
    }
    const auto& q = b.points.front();
    EXPECT_NEAR(q.u.squaredNorm(), 4.0 * M_PI * (q.lambda - 1.0) / 3.0, 1e-3 * q.u.squaredNorm());
  }
  EXPECT_EQ(classify_trichotomy(bs), TrichotomyLabel::case1_unbounded);
}

TEST(Continuation, ReconnectAndLoopOnCraftedSystems) {
  // u^2 = (lambda - 1)(4 - lambda): an arc from lambda = 1 to lambda = 4.
  const auto arc = scalar_system([](double u, double l) { return (l - 1) * (4 - l) - u * u; },
                                 [](double u, double) { return -2 * u; }, [](double, double l) { return 5 - 2 * l; },
                                 {1.0, 4.0});
  const Branch r = trace(arc, 1.02, 0.3);
  EXPECT_EQ(r.termination, Termination::trivial_reconnect) << r.diagnostics;
  EXPECT_DOUBLE_EQ(r.reconnect_lambda, 4.0);
  EXPECT_EQ(classify_trichotomy({r}), TrichotomyLabel::case2_reconnect);

  // (lambda - 1)^2 = u^2 (1 - u^2): a figure eight through (0, 1).
  const auto eight = scalar_system([](double u, double l) { return (l - 1) * (l - 1) - u * u + u * u * u * u; },
                                   [](double u, double) { return -2 * u + 4 * u * u * u; },
                                   [](double, double l) { return 2 * (l - 1); }, {1.0});
  const Branch l = trace(eight, 1.02, 0.02);
  EXPECT_EQ(l.termination, Termination::loop) << l.diagnostics;
  EXPECT_EQ(classify_trichotomy({l}, true), TrichotomyLabel::case3_loop);
  EXPECT_THROW(classify_trichotomy({l}, false), ConsistencyError);
}

TEST(Trichotomy, RemainingLabels) {
  Branch b;
  b.termination = Termination::budget;
  EXPECT_EQ(classify_trichotomy({b}), TrichotomyLabel::inconclusive_budget);
  EXPECT_EQ(classify_trichotomy({b}, true), TrichotomyLabel::two_solution);
  EXPECT_EQ(classify_trichotomy({}), TrichotomyLabel::inconclusive_budget);
  for (auto t : {TrichotomyLabel::case1_unbounded, TrichotomyLabel::case2_reconnect, TrichotomyLabel::case3_loop,
                 TrichotomyLabel::two_solution, TrichotomyLabel::inconclusive_budget})
    EXPECT_FALSE(std::string(to_string(t)).empty());
}

TEST(Dichotomy, CubicGivesInvariantCircle) {
  const auto r = m2_dichotomy(cubic_spec(8), 1);
  EXPECT_EQ(r.classification, BifurcationReport::Classification::attractor_repeller_bifurcation);
  ASSERT_TRUE(r.circle.has_value());
  ASSERT_TRUE(r.circle->found) << r.circle->diagnostics;
  EXPECT_EQ(r.circle_side, Side::right);
  // Reduced field 0.05 c - 3/(4 pi) |c|^2 c.
  EXPECT_NEAR(r.circle->mean_radius, std::sqrt(4.0 * M_PI * 0.05 / 3.0), 1e-4);
  EXPECT_EQ(r.circle->kind, InvariantCircle::Kind::equilibria_with_connections);
}

TEST(Dichotomy, SinxIsStatic) {
  const auto r = m2_dichotomy(sinx_spec(8), 1);
  EXPECT_EQ(r.chi, 0);
  EXPECT_NE(r.classification, BifurcationReport::Classification::attractor_repeller_bifurcation);
  EXPECT_TRUE(r.local_left);
  EXPECT_TRUE(r.local_right);
  EXPECT_EQ(r.K_index_left, 1);
  EXPECT_EQ(r.K_index_right, 1);
  ASSERT_TRUE(r.gamma1.has_value());
  EXPECT_NEAR(*r.gamma1, 1.0 / (4.0 * std::sqrt(M_PI)), 1e-12);
  EXPECT_THROW(m2_dichotomy(sinx_spec(8), 0), ValidationError);
}

namespace {

std::vector<Point2> as_points(const std::vector<Vector>& zs, int a, int b) {
  std::vector<Point2> out;
  for (const auto& z : zs) out.emplace_back(z[a], z[b]);
  return out;
}

/// Flattened branch points (u, lambda) as rows for set comparisons.
std::vector<Vector> branch_cloud(const std::vector<Branch>& bs, const std::function<Vector(const Vector&)>& map) {
  std::vector<Vector> out;
  for (const auto& b : bs)
    for (const auto& p : b.points) {
      Vector x(p.u.size() + 1);
      x << map(p.u), p.lambda;
      out.push_back(x);
    }
  return out;
}

double directed(const std::vector<Vector>& A, const std::vector<Vector>& B) {
  double worst = 0.0;
  for (const auto& a : A) {
    double best = 1e300;
    for (const auto& b : B) best = std::min(best, (a - b).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST(Continuation, BranchPointInvariants) {
  BifurcationOptions o;
  o.continuation.R_max = 3.0;
  for (const ProblemSpec& s : {cubic_spec(6), sinx_spec(6)}) {
    for (const auto& b : continue_galerkin_branches(s, 1, o)) {
      ASSERT_GE(b.points.size(), 3u);
      for (std::size_t i = 0; i < b.points.size(); ++i) {
        const auto& p = b.points[i];
        EXPECT_LT(galerkin_residual(s, FourierVector(s.truncation, p.u), p.lambda).norm(), 1e-9);
        if (i == 0) continue;
        EXPECT_GT(p.tangent.dot(b.points[i - 1].tangent), 0.0);
        const double gap = p.arclength - b.points[i - 1].arclength;
        EXPECT_LE(gap, o.continuation.h_max * (1 + 1e-12));
        if (i + 1 < b.points.size()) {
          EXPECT_GE(gap, o.continuation.h_min * (1 - 1e-12));
        }
      }
    }
  }
}

TEST(Continuation, OneModeCubicMatchesRadialOracle) {
  // At N = 1 the radial equation (lambda - 1) r = 3 r^3 / (4 pi) is exact.
  BifurcationOptions o;
  o.continuation.R_max = 2.0;
  const auto bs = continue_galerkin_branches(cubic_spec(1), 1, o);
  ASSERT_FALSE(bs.empty());
  for (const auto& b : bs)
    for (const auto& p : b.points) EXPECT_NEAR(p.u.norm(), std::sqrt(4.0 * M_PI * (p.lambda - 1.0) / 3.0), 1e-5);
}

TEST(Continuation, TranscriticalCrossingAtSimpleEigenvalue) {
  // a = 1 + sin x, k = 0: lambda = -<a e0^2, e0> c + O(c^2) with <a e0^2, e0> = 1 / sqrt(2 pi).
  ProblemSpec s;
  s.truncation = 6;
  s.a = FourierVector(1);
  s.a[0] = std::sqrt(2.0 * M_PI);
  s.a[1] = std::sqrt(M_PI);
  const double slope = -1.0 / std::sqrt(2.0 * M_PI);
  for (double lambda : {-0.004, -0.002, 0.002, 0.004}) {
    const auto zs = nontrivial_equilibria(s, 0, lambda, 0.6);
    ASSERT_EQ(zs.size(), 1u) << lambda;
    EXPECT_NEAR(lambda / zs[0][0], slope, 0.02 * std::abs(slope));
  }
  // Continue from the right toward the origin: the branch reaches u = 0 at lambda = 0 transversally.
  const GalerkinBranchSystem g = galerkin_branch_system(s);
  BranchPoint p;
  p.u = nontrivial_equilibria(s, 0, 0.02, 0.6).front();
  p.lambda = 0.02;
  Vector dir(p.u.size() + 1);
  dir << -p.u, 0.0;
  ContinuationOptions co;
  co.h_max = 0.01;
  const Branch b = continue_branch(g.sys, p, dir, 0.0, co);
  ASSERT_FALSE(b.points.empty());
  const auto& q = b.points.back();
  EXPECT_LT(q.u.norm(), co.reconnect_tol);
  EXPECT_NEAR(q.lambda, 0.0, co.eig_tol);
  EXPECT_GT(std::abs(q.tangent[q.tangent.size() - 1]), 0.1);
}

TEST(Continuation, SymmetricSpecGivesSymmetricBranchSet) {
  // a = sin x is odd, so u(x) -> -u(-x) maps equilibria to equilibria:
  // sin n coefficients are kept and cos n coefficients change sign.
  const ProblemSpec s = sinx_spec(6);
  BifurcationOptions o;
  o.continuation.R_max = 2.0;
  const auto bs = continue_galerkin_branches(s, 1, o);
  ASSERT_FALSE(bs.empty());
  auto reflect = [](const Vector& u) {
    Vector v = u;
    for (int i = 0; i < u.size(); ++i)
      if (TrigMode::from_index(i).parity != Parity::sine) v[i] = -u[i];
    return v;
  };
  auto id = [](const Vector& u) { return u; };
  const auto A = branch_cloud(bs, id), B = branch_cloud(bs, reflect);
  EXPECT_LT(std::max(directed(A, B), directed(B, A)), 1e-6);
}

TEST(SetIndex, FormulaHoldsAtThreeSamplesPerSide) {
  for (const ProblemSpec& s : {sinx_spec(8), cubic_spec(8)}) {
    const OriginConley oc = origin_conley(s, 1);
    for (Side side : {Side::left, Side::right})
      for (double off : {0.01, 0.02, 0.03}) {
        const double lambda = 1.0 + (side == Side::left ? -off : off);
        EXPECT_EQ(shell_index(s, 1, lambda).index, index_formula(oc.m1, oc.m2, oc.chi, side)) << lambda;
      }
  }
}

TEST(SetIndex, BifurcatingSetShrinksToTheOrigin) {
  // d_H(K_lambda, {0}) decreases as lambda decreases to 1 on the cubic spec.
  const ReducedField rf(cubic_spec(8), 1);
  const std::vector<Point2> origin{Point2::Zero()};
  double prev = 1e300;
  for (double lambda : {1.04, 1.02, 1.01, 1.005}) {
    auto f = [&](const Point2& p) -> Point2 {
      const Vector v = rf(Vector{{p.x(), p.y()}}, lambda);
      return {v[0], v[1]};
    };
    const InvariantCircle c = detect_invariant_circle(f, Point2::Zero(), 0.02, 0.8);
    ASSERT_TRUE(c.found) << lambda;
    const double d = directed_hausdorff(c.witnesses, origin);
    EXPECT_LT(d, prev);
    prev = d;
  }
  // Lifted equilibria give the same picture in the kernel plane.
  const auto zs = nontrivial_equilibria(cubic_spec(8), 1, 1.02, 0.6);
  if (!zs.empty()) {
    const int s1 = TrigMode{1, Parity::sine}.index(), c1 = TrigMode{1, Parity::cosine}.index();
    EXPECT_LT(directed_hausdorff(as_points(zs, s1, c1), origin), 0.6);
  }
}

TEST(Dichotomy, Sin2xFormsAndConsistentClassification) {
  ProblemSpec s;
  s.truncation = 8;
  s.a = FourierVector(2);
  s.a[TrigMode{2, Parity::sine}.index()] = std::sqrt(M_PI);
  const ReducedField rf(s, 1);
  const TrigMode e[2] = {{1, Parity::sine}, {1, Parity::cosine}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        const double ref = oracle::integrate([&](double x) { return std::sin(2 * x) * e[j].value(x) * e[l].value(x) * e[i].value(x); });
        EXPECT_NEAR(rf.b(i, j, l), ref, 1e-13);
      }
  try {
    const auto r = m2_dichotomy(s, 1);
    const bool ar = r.origin == BlockReport::Classification::attractor || r.origin == BlockReport::Classification::repeller;
    EXPECT_EQ(ar, r.classification == BifurcationReport::Classification::attractor_repeller_bifurcation);
    EXPECT_EQ(r.K_index_left, index_formula(r.m1, r.m2, r.chi, Side::left));
    EXPECT_EQ(r.K_index_right, index_formula(r.m1, r.m2, r.chi, Side::right));
  } catch (const Error& err) {
    // A degenerate origin must be reported, not misclassified.
    SUCCEED() << err.what();
  }
}
