#include <gtest/gtest.h>

#include "eqindex/conley_planar.hpp"
#include "oracles.hpp"

using namespace eqindex;

namespace {

auto linear(double a, double b, double c, double d) {
  return [=](const Point2& p) { return Point2(a * p.x() + b * p.y(), c * p.x() + d * p.y()); };
}

}  // namespace

TEST(Block, HyperbolicLinearFields) {
  const auto saddle = classify_block(linear(1, 0, 0, -1), {0, 0}, 1.0);
  EXPECT_EQ(saddle.classification, BlockReport::Classification::neither);
  EXPECT_EQ(saddle.exit_arcs, 2);
  EXPECT_EQ(saddle.entry_arcs, 2);
  EXPECT_EQ(saddle.chi, -1);
  EXPECT_EQ(saddle.arc_endpoints.size(), 4u);
  const auto sink = classify_block(linear(-1, 0, 0, -2), {0, 0}, 1.0);
  EXPECT_EQ(sink.classification, BlockReport::Classification::attractor);
  EXPECT_EQ(sink.chi, 1);
  const auto source = classify_block(linear(1, 0.5, -0.5, 1), {0, 0}, 1.0);
  EXPECT_EQ(source.classification, BlockReport::Classification::repeller);
  EXPECT_EQ(source.chi, 1);
  EXPECT_EQ(source.flux_samples.size(), 512u);
}

TEST(Block, RotationIsNotIsolating) {
  const auto rot = classify_block(linear(0, -1, 1, 0), {0, 0}, 1.0);
  EXPECT_EQ(rot.classification, BlockReport::Classification::not_isolating);
  // Weak focus with strong rotation: circle tangencies are internal.
  const auto weak = classify_block(linear(0.05, -1, 1, -0.3), {0, 0}, 1.0);
  EXPECT_EQ(weak.classification, BlockReport::Classification::not_isolating);
}

TEST(Block, OffCenterSaddleAndBounceOff) {
  // Saddle at (0.3, 0): the circle around the origin still isolates it.
  auto f = [](const Point2& p) { return Point2(p.x() - 0.3, -p.y()); };
  const auto r = classify_block(f, {0, 0}, 1.0);
  EXPECT_EQ(r.chi, -1);
  // f = (1, 0): the flow crosses the disk; the tangencies at the poles end the exit arc.
  auto g = [](const Point2&) { return Point2(1.0, 0.0); };
  const auto b = classify_block(g, {0, 0}, 1.0);
  EXPECT_EQ(b.chi, 0);
  EXPECT_EQ(b.exit_arcs, 1);
  EXPECT_EQ(b.arc_endpoints.size(), 2u);
  EXPECT_TRUE(b.bounce_off_points.empty());
}

TEST(Block, AutoShrinkFindsIsolatingRadius) {
  // Sink at the origin; the unit circle is invariant, so blocks of radius 1 fail.
  auto f = [](const Point2& p) {
    const double r2 = p.squaredNorm();
    return Point2(-p.x() * (1 - r2) - 2 * p.y() * r2, -p.y() * (1 - r2) + 2 * p.x() * r2);
  };
  const auto r = classify_block_auto(f, {0, 0}, 1.0);
  EXPECT_EQ(r.classification, BlockReport::Classification::attractor);
  EXPECT_GT(r.shrinks, 0);
}

TEST(Chi, ConsistencyOnClassicalFields) {
  EXPECT_EQ(chi_consistency(linear(1, 0, 0, -1), {0, 0}, 1.0).chi, -1);
  EXPECT_EQ(chi_consistency(linear(-1, 0, 0, -1), {0, 0}, 1.0).chi, 1);
  EXPECT_EQ(chi_consistency(linear(1, 0, 0, 1), {0, 0}, 1.0).chi, 1);
  EXPECT_THROW(chi_consistency(linear(0, -1, 1, 0), {0, 0}, 1.0), Error);
}

TEST(Chi, ConsistencyOnRandomFields) {
  Lcg rng(79);
  int admissible = 0;
  for (int trial = 0; trial < 80 && admissible < 30; ++trial) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
    const double q = 0.3 * rng.normal(), s = 0.3 * rng.normal();
    auto f = [=](const Point2& p) {
      return Point2(a * p.x() + b * p.y() + q * p.x() * p.y(), c * p.x() + d * p.y() + s * p.y() * p.y());
    };
    const auto blk = classify_block(f, {0, 0}, 0.5);
    if (blk.classification == BlockReport::Classification::not_isolating) continue;
    try {
      const auto cc = chi_consistency(f, {0, 0}, 0.5);
      EXPECT_TRUE(cc.consistent);
    } catch (const BoundaryZeroError&) {
      continue;
    }
    ++admissible;
  }
  EXPECT_GE(admissible, 20);
}

TEST(Interval, ScalarBlocks) {
  EXPECT_EQ(classify_interval([](double x) { return -x; }, -1, 1).chi, 1);
  EXPECT_EQ(classify_interval([](double x) { return x; }, -1, 1).chi, -1);
  EXPECT_EQ(classify_interval([](double x) { return x * x + 1; }, -1, 1).chi, 0);
  EXPECT_THROW(classify_interval([](double x) { return x - 1; }, -1, 1), BoundaryZeroError);
}

TEST(Rk4, RotationPeriodAndSinkDecay) {
  const auto rot = integrate_rk4(linear(0, -1, 1, 0), {1.0, 0.0}, 0.01, 100.0, 10.0);
  EXPECT_EQ(rot.terminal, OrbitSample::Terminal::period_detected);
  EXPECT_NEAR(rot.period, 2.0 * M_PI, 1e-8);
  const auto sink = integrate_rk4(linear(-1, 0, 0, -1), {1.0, 0.0}, 0.01, 5.0, 10.0);
  EXPECT_EQ(sink.terminal, OrbitSample::Terminal::time_budget);
  EXPECT_NEAR(sink.states.back().x(), std::exp(-5.0), 1e-9);
  Rk4Options o;
  o.equilibrium_tol = 1e-6;
  const auto stop = integrate_rk4(linear(-1, 0, 0, -1), {1.0, 0.0}, 0.01, 100.0, 10.0, o);
  EXPECT_EQ(stop.terminal, OrbitSample::Terminal::equilibrium);
  const auto out = integrate_rk4(linear(1, 0, 0, 1), {1.0, 0.0}, 0.01, 100.0, 3.0);
  EXPECT_EQ(out.terminal, OrbitSample::Terminal::left_domain);
  EXPECT_NEAR(out.times.back(), std::log(3.0), 0.02);
  EXPECT_THROW(integrate_rk4(linear(1, 0, 0, 1), {1.0, 0.0}, 0.0, 1.0, 3.0), ValidationError);
}

TEST(Circle, LimitCycleOfHopfNormalForm) {
  auto f = [](const Point2& p) {
    const double g = 0.04 - p.squaredNorm();
    return Point2(g * p.x() - p.y(), g * p.y() + p.x());
  };
  const auto c = detect_invariant_circle(f, {0, 0}, 0.05, 0.6);
  ASSERT_TRUE(c.found) << c.diagnostics;
  EXPECT_EQ(c.kind, InvariantCircle::Kind::closed_orbit);
  EXPECT_NEAR(c.mean_radius, 0.2, 1e-4);
  EXPECT_NEAR(c.min_radius, 0.2, 1e-3);
  EXPECT_NEAR(c.max_radius, 0.2, 1e-3);
}

TEST(Circle, CircleOfEquilibria) {
  // Radial field with a circle of equilibria at r = 0.3.
  auto f = [](const Point2& p) { return Point2((0.09 - p.squaredNorm()) * p.x(), (0.09 - p.squaredNorm()) * p.y()); };
  const auto c = detect_invariant_circle(f, {0, 0}, 0.05, 0.8);
  ASSERT_TRUE(c.found) << c.diagnostics;
  EXPECT_EQ(c.kind, InvariantCircle::Kind::equilibria_with_connections);
  EXPECT_NEAR(c.mean_radius, 0.3, 1e-6);
}

TEST(Circle, SinkHasNoCircle) {
  const auto c = detect_invariant_circle(linear(-1, 0, 0, -1), {0, 0}, 0.05, 0.6);
  EXPECT_FALSE(c.found);
  EXPECT_THROW(detect_invariant_circle(linear(-1, 0, 0, -1), {0, 0}, 0.5, 0.4), ValidationError);
}

TEST(Hausdorff, PointSets) {
  const std::vector<Point2> A{{0, 0}, {1, 0}}, B{{0, 0}, {1, 0}, {1, 2}};
  EXPECT_DOUBLE_EQ(directed_hausdorff(A, B), 0.0);
  EXPECT_DOUBLE_EQ(directed_hausdorff(B, A), 2.0);
  EXPECT_DOUBLE_EQ(hausdorff_distance(A, B), 2.0);
  EXPECT_DOUBLE_EQ(directed_hausdorff(std::vector<Point2>{}, A), 0.0);
  EXPECT_TRUE(std::isinf(directed_hausdorff(A, std::vector<Point2>{})));
}
