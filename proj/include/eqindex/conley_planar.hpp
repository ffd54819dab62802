#pragma once

// Planar dynamics of a reduced field: fixed-step RK4 orbits, circular
// isolating blocks classified by the sign of the outward flux, the Euler
// characteristic of the Conley index from the exit arcs, invariant-circle
// detection and Hausdorff distance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eqindex/errors.hpp"
#include "eqindex/parallel.hpp"
#include "eqindex/planar_degree.hpp"

namespace eqindex {

struct OrbitSample {
  enum class Terminal { left_domain, period_detected, time_budget, equilibrium };
  std::vector<double> times;
  std::vector<Point2> states;
  Terminal terminal = Terminal::time_budget;
  double period = 0.0;
  std::size_t cycle_begin = 0;  // first state of the detected cycle
};

inline const char* to_string(OrbitSample::Terminal t) {
  switch (t) {
    case OrbitSample::Terminal::left_domain: return "left_domain";
    case OrbitSample::Terminal::period_detected: return "period_detected";
    case OrbitSample::Terminal::time_budget: return "time_budget";
    case OrbitSample::Terminal::equilibrium: return "equilibrium";
  }
  return "";
}

struct Rk4Options {
  double section_tol = 1e-6;     // return distance on the Poincare section
  double equilibrium_tol = 0.0;  // stop when |f| falls below this (0 disables)
  double inner_radius = 0.0;     // also stop when |x - center| < inner_radius
  Point2 center = Point2::Zero();
  int record_stride = 1;
};

/// Classical RK4 with fixed step. The Poincare section passes through x0
/// with normal f(x0); a period is detected when a crossing lands within
/// section_tol of the previous crossing (x0 itself counts as the first)
/// after the orbit has travelled a nontrivial path. Crossings are located
/// by Newton iteration on a partial RK4 step.
template <class Field>
OrbitSample integrate_rk4(const Field& f, Point2 x0, double dt, double t_max, double domain_radius,
                          const Rk4Options& opt = {}) {
  if (!(dt > 0)) throw ValidationError("integrate_rk4: dt must be positive");
  OrbitSample out;
  out.times.push_back(0.0);
  out.states.push_back(x0);
  const Point2 f0 = f(x0);
  const double f0n = f0.norm();
  const Point2 normal = f0n > 0 ? Point2(f0 / f0n) : Point2(1.0, 0.0);
  Point2 x = x0;
  double t = 0.0;
  double prev_side = 0.0;
  Point2 last_cross = x0;
  double last_cross_t = 0.0;
  std::size_t last_cross_index = 0;
  double path = 0.0;  // path length since the last crossing
  const long steps = long(std::ceil(t_max / dt));
  auto record = [&](double tt, const Point2& p) {
    if (out.states.back() != p) {
      out.times.push_back(tt);
      out.states.push_back(p);
    }
  };
  for (long i = 1; i <= steps; ++i) {
    const Point2 k1 = f(x);
    if (opt.equilibrium_tol > 0 && k1.norm() < opt.equilibrium_tol) {
      record(t, x);
      out.terminal = OrbitSample::Terminal::equilibrium;
      return out;
    }
    auto step = [&](const Point2& y, const Point2& d1, double h) {
      const Point2 d2 = f(Point2(y + 0.5 * h * d1));
      const Point2 d3 = f(Point2(y + 0.5 * h * d2));
      const Point2 d4 = f(Point2(y + h * d3));
      return Point2(y + (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4));
    };
    const Point2 xn = step(x, k1, dt);
    const double tn = t + dt;
    path += (xn - x).norm();
    const double side = (xn - x0).dot(normal);
    if (f0n > 0 && prev_side < 0 && side >= 0) {
      // Newton on the step length, starting from the chord estimate.
      double tau = dt * (-prev_side / (side - prev_side));
      Point2 xc = step(x, k1, tau);
      for (int it = 0; it < 4; ++it) {
        const double g = (xc - x0).dot(normal), dg = f(xc).dot(normal);
        if (dg == 0.0) break;
        const double next = tau - g / dg;
        if (!(next >= 0.0 && next <= dt)) break;
        tau = next;
        xc = step(x, k1, tau);
      }
      const double tc = t + tau;
      if ((xc - last_cross).norm() < opt.section_tol && path > 1e3 * opt.section_tol) {
        out.period = tc - last_cross_t;
        out.cycle_begin = last_cross_index;
        record(tn, xn);
        out.terminal = OrbitSample::Terminal::period_detected;
        return out;
      }
      last_cross = xc;
      last_cross_t = tc;
      last_cross_index = out.states.size();
      path = 0.0;
    }
    prev_side = side;
    x = xn;
    t = tn;
    if (i % opt.record_stride == 0 || i == steps) record(t, x);
    const double r = (x - opt.center).norm();
    if (!std::isfinite(r) || r > domain_radius || r < opt.inner_radius) {
      record(t, x);
      out.terminal = OrbitSample::Terminal::left_domain;
      return out;
    }
  }
  out.terminal = OrbitSample::Terminal::time_budget;
  return out;
}

struct BlockReport {
  enum class Classification { attractor, repeller, neither, not_isolating };
  Point2 center = Point2::Zero();
  double radius = 0.0;
  std::vector<std::pair<double, double>> flux_samples;  // (theta, s(theta))
  int exit_arcs = 0;
  int entry_arcs = 0;
  std::vector<double> arc_endpoints;      // sign changes of s
  std::vector<double> tangencies;         // every theta with s = 0
  std::vector<double> bounce_off_points;  // external tangencies (part of the exit set)
  int chi = 0;
  Classification classification = Classification::not_isolating;
  int shrinks = 0;
};

inline const char* to_string(BlockReport::Classification c) {
  switch (c) {
    case BlockReport::Classification::attractor: return "attractor";
    case BlockReport::Classification::repeller: return "repeller";
    case BlockReport::Classification::neither: return "neither";
    case BlockReport::Classification::not_isolating: return "not_isolating";
  }
  return "";
}

struct BlockOptions {
  int samples = 512;
  double margin_rel = 1e-7;   // |f| on the circle relative to its maximum
  double flux_tol_rel = 1e-9; // |s| relative to max |f| counted as zero
  double theta_tol = 1e-8;
};

/// Flux classification of the circle |x - center| = radius.
///
/// At a zero of s the second derivative of |x(t) - center|^2 along the
/// orbit is 2|f|^2 + 2 <x - c, Df f>; positive means the orbit touches the
/// circle from outside (bounce-off), otherwise the orbit runs inside along
/// the boundary and the circle is not an isolating block.
template <class Field>
BlockReport classify_block(const Field& f, const Point2& center, double radius, const BlockOptions& opt = {}) {
  constexpr double tau = 2.0 * std::numbers::pi;
  BlockReport rep;
  rep.center = center;
  rep.radius = radius;
  auto point = [&](double th) { return Point2(center + radius * Point2(std::cos(th), std::sin(th))); };
  auto flux = [&](double th) { return f(point(th)).dot(Point2(std::cos(th), std::sin(th))); };

  const int n = opt.samples;
  std::vector<double> th(n), s(n);
  double scale = 0.0, min_abs = std::numeric_limits<double>::infinity();
  int arg_min = 0;
  for (int i = 0; i < n; ++i) {
    th[i] = tau * i / n;
    const Point2 v = f(point(th[i]));
    s[i] = v.dot(Point2(std::cos(th[i]), std::sin(th[i])));
    scale = std::max(scale, v.norm());
    if (v.norm() < min_abs) {
      min_abs = v.norm();
      arg_min = i;
    }
    rep.flux_samples.emplace_back(th[i], s[i]);
  }
  if (!(min_abs > opt.margin_rel * scale)) detail::boundary_zero(point(th[arg_min]), min_abs);
  const double ztol = opt.flux_tol_rel * scale;

  auto rho_ddot = [&](double t) {
    const Point2 x = point(t);
    const Point2 v = f(x);
    const Matrix2 J = numeric_jacobian(f, x, 1e-7 * std::max(1.0, radius));
    return 2.0 * v.squaredNorm() + 2.0 * (x - center).dot(J * v);
  };

  // Runs of samples with |s| at tolerance level mark tangency intervals.
  for (int i = 0; i < n; ++i) {
    if (std::abs(s[i]) <= ztol && std::abs(s[(i + 1) % n]) <= ztol) {
      rep.classification = BlockReport::Classification::not_isolating;
      return rep;
    }
  }

  auto bisect = [&](double a, double b, double fa) {
    while (b - a > opt.theta_tol) {
      const double m = 0.5 * (a + b), fm = flux(m);
      if (fm == 0.0) return m;
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  bool internal = false;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const double a = th[i], b = (j == 0) ? tau : th[j];
    const double sa = s[i], sb = s[j];
    if (std::abs(sa) <= ztol) {
      rep.tangencies.push_back(a);
      if (rho_ddot(a) > 0) {
        const double sp = s[(i + n - 1) % n];
        if ((sp > 0) == (sb > 0))
          rep.bounce_off_points.push_back(a);
        else
          rep.arc_endpoints.push_back(a);
      } else {
        internal = true;
      }
      continue;
    }
    if (std::abs(sb) <= ztol) continue;
    if ((sa < 0) != (sb < 0)) {
      const double root = bisect(a, b, sa);
      rep.arc_endpoints.push_back(std::fmod(root, tau));
      rep.tangencies.push_back(std::fmod(root, tau));
      if (!(rho_ddot(root) > 0)) internal = true;
    } else {
      // Same sign at both ends: look for a hidden pair of zeros.
      const double m = 0.5 * (a + b), sm = flux(m);
      if ((sm < 0) != (sa < 0) || std::abs(sm) <= ztol) {
        rep.classification = BlockReport::Classification::not_isolating;
        return rep;
      }
    }
  }
  if (internal) {
    rep.classification = BlockReport::Classification::not_isolating;
    return rep;
  }

  // Count maximal arcs of each sign around the circle.
  int first = -1;
  for (int i = 0; i < n; ++i)
    if (std::abs(s[i]) > ztol) {
      first = i;
      break;
    }
  int exits = 0, entries = 0;
  int current = 0;
  for (int step = 0; step < n; ++step) {
    const int i = (first + step) % n;
    if (std::abs(s[i]) <= ztol) continue;
    const int sg = s[i] > 0 ? 1 : -1;
    if (sg != current) {
      (sg > 0 ? exits : entries) += 1;
      current = sg;
    }
  }
  // The walk started inside an arc; merge it with the closing arc.
  const int first_sign = s[first] > 0 ? 1 : -1;
  if (current == first_sign && (exits + entries) > 1) (first_sign > 0 ? exits : entries) -= 1;
  rep.exit_arcs = exits;
  rep.entry_arcs = entries;

  if (exits == 0) {
    rep.classification = BlockReport::Classification::attractor;
    rep.chi = 1;
  } else if (entries == 0) {
    rep.classification = BlockReport::Classification::repeller;
    rep.chi = 1;
  } else {
    rep.classification = BlockReport::Classification::neither;
    rep.chi = 1 - exits;
  }
  return rep;
}

/// classify_block with the radius halved (up to `max_shrinks` times) while
/// the circle is not an isolating block.
template <class Field>
BlockReport classify_block_auto(const Field& f, const Point2& center, double radius, int max_shrinks = 6,
                                const BlockOptions& opt = {}) {
  BlockReport rep = classify_block(f, center, radius, opt);
  int shrinks = 0;
  while (rep.classification == BlockReport::Classification::not_isolating && shrinks < max_shrinks) {
    radius *= 0.5;
    ++shrinks;
    rep = classify_block(f, center, radius, opt);
  }
  rep.shrinks = shrinks;
  return rep;
}

struct IntervalBlock {
  BlockReport::Classification classification = BlockReport::Classification::neither;
  int chi = 0;
};

/// One-dimensional block [a, b] for a scalar field.
template <class Field1>
IntervalBlock classify_interval(const Field1& f, double a, double b) {
  const double fa = f(a), fb = f(b);
  if (fa == 0.0 || fb == 0.0) throw BoundaryZeroError("scalar field vanishes at a block end", {fa == 0.0 ? a : b});
  if (fa > 0 && fb < 0) return {BlockReport::Classification::attractor, 1};
  if (fa < 0 && fb > 0) return {BlockReport::Classification::repeller, -1};
  return {BlockReport::Classification::neither, 0};
}

struct ChiConsistency {
  int chi = 0;
  int degree = 0;
  bool consistent = false;
  BlockReport block;
};

/// chi of the circular block against the winding degree on the same disk.
/// Throws ConsistencyError on mismatch.
template <class Field>
ChiConsistency chi_consistency(const Field& f, const Point2& center, double radius, const BlockOptions& opt = {}) {
  ChiConsistency out;
  out.block = classify_block(f, center, radius, opt);
  if (out.block.classification == BlockReport::Classification::not_isolating)
    throw Error("chi_consistency: circle of radius " + std::to_string(radius) + " is not an isolating block");
  out.chi = out.block.chi;
  out.degree = winding_degree(f, PlanarRegion::disk(center, radius));
  out.consistent = out.chi == out.degree;
  if (!out.consistent)
    throw ConsistencyError("chi = " + std::to_string(out.chi) + " differs from degree " + std::to_string(out.degree));
  return out;
}

struct InvariantCircle {
  enum class Kind { none, closed_orbit, equilibria_with_connections };
  bool found = false;
  Kind kind = Kind::none;
  std::vector<Point2> witnesses;
  double mean_radius = 0.0;
  double min_radius = 0.0;
  double max_radius = 0.0;
  std::string diagnostics;
};

inline const char* to_string(InvariantCircle::Kind k) {
  switch (k) {
    case InvariantCircle::Kind::none: return "none";
    case InvariantCircle::Kind::closed_orbit: return "closed_orbit";
    case InvariantCircle::Kind::equilibria_with_connections: return "equilibria_with_connections";
  }
  return "";
}

struct CircleOptions {
  int seeds_per_ring = 16;
  double dt = 0.05;
  double t_max = 2000.0;
  double equilibrium_tol = 1e-9;
  int coverage_bins = 128;
  int max_refinements = 8;
  int threads = thread_count();
};

namespace detail {

/// Levenberg-Marquardt polish; converges onto a curve of zeros as well.
template <class Field>
std::optional<Point2> polish_zero(const Field& f, Point2 x, double tol) {
  for (int it = 0; it < 100; ++it) {
    const Point2 v = f(x);
    if (v.norm() < tol) return x;
    const Matrix2 J = numeric_jacobian(f, x, 1e-7);
    const double mu = 1e-12 * (1.0 + J.squaredNorm());
    const Point2 dx = -(J.transpose() * J + mu * Matrix2::Identity()).ldlt().solve(J.transpose() * v);
    if (!dx.allFinite()) return std::nullopt;
    x += dx;
  }
  return f(x).norm() < 10 * tol ? std::optional<Point2>(x) : std::nullopt;
}

}  // namespace detail

/// Integrates seeds from two rings just inside the annulus. Succeeds when no
/// seed leaves the annulus and the limit sets cover every angular bin,
/// either as one periodic orbit or as equilibria joined by orbit tails.
template <class Field>
InvariantCircle detect_invariant_circle(const Field& f, const Point2& center, double r_in, double r_out,
                                        const CircleOptions& opt = {}) {
  constexpr double tau = 2.0 * std::numbers::pi;
  if (!(r_in > 0) || !(r_in < r_out)) throw ValidationError("detect_invariant_circle: 0 < r_in < r_out required");
  InvariantCircle out;
  Rk4Options ro;
  ro.center = center;
  ro.inner_radius = r_in;
  ro.equilibrium_tol = opt.equilibrium_tol;
  ro.record_stride = 10;

  std::vector<Point2> seeds;
  for (double r : {r_in + 0.1 * (r_out - r_in), r_out - 0.1 * (r_out - r_in)})
    for (int i = 0; i < opt.seeds_per_ring; ++i) {
      const double th = tau * (i + 0.5) / opt.seeds_per_ring;
      seeds.push_back(center + r * Point2(std::cos(th), std::sin(th)));
    }

  std::vector<bool> covered(opt.coverage_bins, false);
  auto cover = [&](const Point2& p) {
    double a = std::atan2(p.y() - center.y(), p.x() - center.x());
    if (a < 0) a += tau;
    covered[std::min(opt.coverage_bins - 1, int(a / tau * opt.coverage_bins))] = true;
  };
  std::vector<Point2> equilibria;
  auto add_equilibrium = [&](const Point2& p) {
    for (const auto& q : equilibria)
      if ((q - p).norm() < 1e-7) return;
    equilibria.push_back(p);
  };

  auto run = [&](const std::vector<Point2>& starts) -> bool {
    const auto orbits = parallel_map(
        int(starts.size()), [&](int i) { return integrate_rk4(f, starts[i], opt.dt, opt.t_max, r_out, ro); },
        opt.threads);
    for (const auto& o : orbits) {
      if (o.terminal == OrbitSample::Terminal::left_domain) {
        out.diagnostics = "a seed left the annulus at t = " + std::to_string(o.times.back());
        return false;
      }
      if (o.terminal == OrbitSample::Terminal::time_budget) {
        out.diagnostics = "a seed neither settled nor closed up within t_max";
        return false;
      }
      if (o.terminal == OrbitSample::Terminal::period_detected) {
        out.kind = InvariantCircle::Kind::closed_orbit;
        out.witnesses.assign(o.states.begin() + std::ptrdiff_t(o.cycle_begin), o.states.end());
      } else {
        const auto z = detail::polish_zero(f, o.states.back(), 1e-12);
        if (!z) {
          out.diagnostics = "equilibrium polish failed";
          return false;
        }
        add_equilibrium(*z);
        cover(*z);
      }
      // Tail of the orbit approximates the connecting orbit it slid along.
      for (std::size_t j = o.states.size() / 2; j < o.states.size(); ++j) cover(o.states[j]);
    }
    return true;
  };

  if (!run(seeds)) return out;
  if (out.kind == InvariantCircle::Kind::closed_orbit) {
    for (auto& p : out.witnesses) cover(p);
  } else {
    // Fill uncovered bins from midpoints of the mean-radius circle.
    for (int pass = 0; pass < opt.max_refinements; ++pass) {
      std::vector<Point2> extra;
      double rmean = 0.0;
      for (const auto& e : equilibria) rmean += (e - center).norm();
      rmean = equilibria.empty() ? 0.5 * (r_in + r_out) : rmean / equilibria.size();
      for (int b = 0; b < opt.coverage_bins; ++b)
        if (!covered[b]) {
          const double th = tau * (b + 0.5) / opt.coverage_bins;
          extra.push_back(center + rmean * Point2(std::cos(th), std::sin(th)));
        }
      if (extra.empty()) break;
      if (!run(extra)) return out;
    }
    out.kind = InvariantCircle::Kind::equilibria_with_connections;
    out.witnesses = equilibria;
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    out.diagnostics = "limit set does not wind around the center";
    out.kind = InvariantCircle::Kind::none;
    return out;
  }
  out.found = true;
  out.min_radius = std::numeric_limits<double>::infinity();
  for (const auto& p : out.witnesses) {
    const double r = (p - center).norm();
    out.mean_radius += r;
    out.min_radius = std::min(out.min_radius, r);
    out.max_radius = std::max(out.max_radius, r);
  }
  out.mean_radius /= double(out.witnesses.size());
  return out;
}

/// Two-sided Hausdorff distance; the one-sided distance from an empty set is 0.
template <class P>
double directed_hausdorff(const std::vector<P>& A, const std::vector<P>& B) {
  if (A.empty()) return 0.0;
  if (B.empty()) return std::numeric_limits<double>::infinity();
  double h = 0.0;
  for (const auto& a : A) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& b : B) d = std::min(d, (a - b).norm());
    h = std::max(h, d);
  }
  return h;
}

template <class P>
double hausdorff_distance(const std::vector<P>& A, const std::vector<P>& B) {
  return std::max(directed_hausdorff(A, B), directed_hausdorff(B, A));
}

}  // namespace eqindex
