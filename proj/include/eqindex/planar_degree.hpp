#pragma once

// Brouwer degree of planar maps: boundary winding and a zero-counting
// oracle (sum of sign det Df over nondegenerate zeros), plus the 1-D variant.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqindex/errors.hpp"

namespace eqindex {

using Point2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

class PlanarRegion {
 public:
  enum class Kind { disk, annulus, polygon };

  static PlanarRegion disk(Point2 center, double radius) {
    if (!(radius > 0)) throw ValidationError("disk radius must be positive");
    PlanarRegion r;
    r.kind_ = Kind::disk;
    r.center_ = center;
    r.r_out_ = radius;
    return r;
  }

  static PlanarRegion annulus(Point2 center, double r_in, double r_out) {
    if (!(r_in > 0) || !(r_in < r_out)) throw ValidationError("annulus requires 0 < r_in < r_out");
    PlanarRegion r;
    r.kind_ = Kind::annulus;
    r.center_ = center;
    r.r_in_ = r_in;
    r.r_out_ = r_out;
    return r;
  }

  static PlanarRegion polygon(std::vector<Point2> vertices) {
    const int n = int(vertices.size());
    if (n < 3) throw ValidationError("polygon needs at least three vertices");
    double area = 0;
    for (int i = 0; i < n; ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % n];
      area += p.x() * q.y() - q.x() * p.y();
    }
    if (!(area > 0)) throw ValidationError("polygon must be positively oriented");
    auto cross = [](Point2 a, Point2 b) { return a.x() * b.y() - a.y() * b.x(); };
    auto hit = [&](Point2 a, Point2 b, Point2 c, Point2 d) {
      const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
      const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
      return d1 * d2 < 0 && d3 * d4 < 0;
    };
    for (int i = 0; i < n; ++i)
      for (int j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (hit(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
          throw ValidationError("polygon is not simple");
      }
    PlanarRegion r;
    r.kind_ = Kind::polygon;
    r.vertices_ = std::move(vertices);
    return r;
  }

  Kind kind() const { return kind_; }
  const Point2& center() const { return center_; }
  double radius() const { return r_out_; }
  double r_in() const { return r_in_; }
  double r_out() const { return r_out_; }
  const std::vector<Point2>& vertices() const { return vertices_; }

  /// Closed boundary curves parameterized on [0, 1), each oriented so that
  /// the region lies to the left.
  std::vector<std::function<Point2(double)>> boundary() const {
    constexpr double tau = 2.0 * std::numbers::pi;
    std::vector<std::function<Point2(double)>> out;
    const Point2 c = center_;
    if (kind_ == Kind::polygon) {
      const auto vs = vertices_;
      out.push_back([vs](double t) {
        const int n = int(vs.size());
        const double s = t * n;
        const int i = std::min(n - 1, int(std::floor(s)));
        const double f = s - i;
        return Point2((1 - f) * vs[i] + f * vs[(i + 1) % n]);
      });
      return out;
    }
    const double ro = r_out_;
    out.push_back([c, ro](double t) { return Point2(c + ro * Point2(std::cos(tau * t), std::sin(tau * t))); });
    if (kind_ == Kind::annulus) {
      const double ri = r_in_;
      out.push_back([c, ri](double t) { return Point2(c + ri * Point2(std::cos(tau * t), -std::sin(tau * t))); });
    }
    return out;
  }

  /// Signed distance to the boundary: positive inside.
  double depth(const Point2& p) const {
    if (kind_ == Kind::polygon) {
      const int n = int(vertices_.size());
      double dmin = std::numeric_limits<double>::infinity();
      bool inside = false;
      for (int i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = vertices_[j];
        const Point2& b = vertices_[i];
        if ((b.y() > p.y()) != (a.y() > p.y()) &&
            p.x() < (a.x() - b.x()) * (p.y() - b.y()) / (a.y() - b.y()) + b.x())
          inside = !inside;
        const Point2 ab = b - a;
        const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        dmin = std::min(dmin, (a + t * ab - p).norm());
      }
      return inside ? dmin : -dmin;
    }
    const double r = (p - center_).norm();
    const double d = r_out_ - r;
    return kind_ == Kind::annulus ? std::min(d, r - r_in_) : d;
  }

  bool contains(const Point2& p) const { return depth(p) > 0; }

  std::pair<Point2, Point2> bounding_box() const {
    if (kind_ == Kind::polygon) {
      Point2 lo = vertices_[0], hi = vertices_[0];
      for (const auto& v : vertices_) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      return {lo, hi};
    }
    return {center_ - Point2::Constant(r_out_), center_ + Point2::Constant(r_out_)};
  }

 private:
  Kind kind_ = Kind::disk;
  Point2 center_ = Point2::Zero();
  double r_in_ = 0.0, r_out_ = 1.0;
  std::vector<Point2> vertices_;
};

struct WindingOptions {
  int initial_samples = 256;
  long max_samples = 1L << 20;
  double margin_rel = 1e-7;  // boundary |f| must exceed margin_rel * max |f|
};

struct Witness {
  std::vector<double> location;
  int sign = 0;
  double det = 0.0;
};

struct IndexReport {
  enum class Method { winding, zero_count, formula };
  int index = 0;
  Method method = Method::zero_count;
  std::vector<Witness> witnesses;
  double margin = 0.0;
};

inline const char* to_string(IndexReport::Method m) {
  switch (m) {
    case IndexReport::Method::winding: return "winding";
    case IndexReport::Method::zero_count: return "zero_count";
    case IndexReport::Method::formula: return "formula";
  }
  return "";
}

namespace detail {

inline double turn_angle(const Point2& a, const Point2& b) {
  return std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
}

[[noreturn]] inline void boundary_zero(const Point2& p, double value) {
  throw BoundaryZeroError("field nearly vanishes on the boundary (|f| = " + std::to_string(value) + " at (" +
                              std::to_string(p.x()) + ", " + std::to_string(p.y()) + "))",
                          {p.x(), p.y()});
}

}  // namespace detail

/// Winding of f along the positively oriented boundary, with adaptive
/// bisection until consecutive directions differ by less than pi/2.
/// Also reports the smallest boundary |f| seen in `margin_out`.
template <class Field>
int winding_degree(const Field& f, const PlanarRegion& region, const WindingOptions& opt = {},
                   double* margin_out = nullptr) {
  const auto curves = region.boundary();
  struct Sample {
    double t;
    Point2 x, v;
  };
  std::vector<std::vector<Sample>> initial(curves.size());
  double scale = 0.0;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (int i = 0; i <= opt.initial_samples; ++i) {
      const double t = double(i) / opt.initial_samples;
      const Point2 x = curves[c](t);
      const Point2 v = f(x);
      scale = std::max(scale, v.norm());
      initial[c].push_back({t, x, v});
    }
  }
  const double margin = opt.margin_rel * scale;
  if (!(scale > 0)) detail::boundary_zero(initial[0][0].x, 0.0);
  double min_abs = std::numeric_limits<double>::infinity();
  long evaluations = 0;
  double total = 0.0;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (const auto& s : initial[c]) {
      const double n = s.v.norm();
      min_abs = std::min(min_abs, n);
      if (n <= margin) detail::boundary_zero(s.x, n);
    }
    for (int i = 0; i < opt.initial_samples; ++i) {
      std::vector<std::pair<Sample, Sample>> stack{{initial[c][i], initial[c][i + 1]}};
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        const double ang = detail::turn_angle(a.v, b.v);
        if (std::abs(ang) < 0.5 * std::numbers::pi) {
          total += ang;
          continue;
        }
        if (++evaluations > opt.max_samples)
          throw Error("winding_degree: boundary refinement exceeded " + std::to_string(opt.max_samples) +
                      " samples");
        const double tm = 0.5 * (a.t + b.t);
        if (!(tm > a.t && tm < b.t)) detail::boundary_zero(a.x, std::min(a.v.norm(), b.v.norm()));
        const Point2 xm = curves[c](tm);
        const Point2 vm = f(xm);
        const double nm = vm.norm();
        min_abs = std::min(min_abs, nm);
        if (nm <= margin) detail::boundary_zero(xm, nm);
        Sample m{tm, xm, vm};
        stack.push_back({m, b});
        stack.push_back({a, m});
      }
    }
  }
  if (margin_out) *margin_out = min_abs;
  const double w = total / (2.0 * std::numbers::pi);
  const double r = std::round(w);
  if (std::abs(w - r) > 1e-6) throw Error("winding_degree: non-integral winding " + std::to_string(w));
  return int(r);
}

struct ZeroCountOptions {
  int grid = 41;
  double newton_tol = 1e-11;
  int max_iterations = 60;
  double dedup_radius = 1e-6;
  double det_tol = 1e-8;
};

struct PlanarZero {
  Point2 x;
  double det;
};

/// Damped Newton from a single start; nullopt on non-convergence.
template <class Field, class Jacobian>
std::optional<Point2> planar_newton(const Field& f, const Jacobian& jac, Point2 x, const ZeroCountOptions& opt,
                                    double escape_radius, const Point2& center) {
  Point2 fx = f(x);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (fx.norm() <= opt.newton_tol) return x;
    const Matrix2 J = jac(x);
    const double det = J.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return std::nullopt;
    const Point2 dx = -J.inverse() * fx;
    double t = 1.0;
    Point2 xn = x + dx, fn = f(xn);
    while (fn.norm() > (1.0 - 0.25 * t) * fx.norm() && t > 1.0 / 1024) {
      t *= 0.5;
      xn = x + t * dx;
      fn = f(xn);
    }
    if ((xn - center).norm() > escape_radius || !std::isfinite(fn.norm())) return std::nullopt;
    if ((xn - x).norm() <= 1e-15 * (1.0 + x.norm()) && fn.norm() > opt.newton_tol) {
      // Stagnated at rounding level: accept only if the residual is tiny anyway.
      if (fn.norm() <= 1e3 * opt.newton_tol) return xn;
      return std::nullopt;
    }
    x = xn;
    fx = fn;
  }
  return fx.norm() <= opt.newton_tol ? std::optional<Point2>(x) : std::nullopt;
}

/// All distinct zeros reached from a grid of starts over the region's
/// bounding box and kept inside the region. Degeneracy is not checked here.
template <class Field, class Jacobian>
std::vector<PlanarZero> locate_planar_zeros(const Field& f, const Jacobian& jac, const PlanarRegion& region,
                                            const ZeroCountOptions& opt = {},
                                            const std::vector<Point2>& extra_starts = {}) {
  const auto [lo, hi] = region.bounding_box();
  const Point2 mid = 0.5 * (lo + hi);
  const double escape = 4.0 * (hi - lo).norm() + 1.0;
  std::vector<Point2> starts = extra_starts;
  for (int i = 0; i < opt.grid; ++i)
    for (int j = 0; j < opt.grid; ++j) {
      const Point2 p(lo.x() + (hi.x() - lo.x()) * (i + 0.5) / opt.grid, lo.y() + (hi.y() - lo.y()) * (j + 0.5) / opt.grid);
      if (region.contains(p)) starts.push_back(p);
    }
  std::vector<PlanarZero> zeros;
  for (const auto& s : starts) {
    const auto z = planar_newton(f, jac, s, opt, escape, mid);
    if (!z || region.depth(*z) < -opt.dedup_radius) continue;
    bool dup = false;
    for (const auto& known : zeros)
      if ((known.x - *z).norm() < opt.dedup_radius) dup = true;
    if (!dup) zeros.push_back({*z, jac(*z).determinant()});
  }
  return zeros;
}

/// Degree as sum of sign det Df over the located zeros.
template <class Field, class Jacobian>
IndexReport zero_count_degree(const Field& f, const Jacobian& jac, const PlanarRegion& region,
                              const ZeroCountOptions& opt = {}, const std::vector<Point2>& extra_starts = {}) {
  IndexReport rep;
  rep.method = IndexReport::Method::zero_count;
  for (const auto& z : locate_planar_zeros(f, jac, region, opt, extra_starts)) {
    if (region.depth(z.x) <= opt.dedup_radius)
      throw BoundaryZeroError("zero on the region boundary", {z.x.x(), z.x.y()});
    if (std::abs(z.det) <= opt.det_tol)
      throw DegenerateZeroError("degenerate zero, det = " + std::to_string(z.det), {z.x.x(), z.x.y()});
    const int s = z.det > 0 ? 1 : -1;
    rep.index += s;
    rep.witnesses.push_back({{z.x.x(), z.x.y()}, s, z.det});
  }
  double m = std::numeric_limits<double>::infinity();
  for (const auto& curve : region.boundary())
    for (int i = 0; i < 256; ++i) m = std::min(m, f(curve(i / 256.0)).norm());
  rep.margin = m;
  return rep;
}

/// Degree of a scalar map on [a, b]: (sign f(b) - sign f(a)) / 2.
template <class Field1>
int interval_degree(const Field1& f, double a, double b, double margin = 0.0) {
  if (!(a < b)) throw ValidationError("interval_degree: a < b required");
  const double fa = f(a), fb = f(b);
  if (std::abs(fa) <= margin || fa == 0.0) throw BoundaryZeroError("zero at interval end", {a});
  if (std::abs(fb) <= margin || fb == 0.0) throw BoundaryZeroError("zero at interval end", {b});
  return ((fb > 0) - (fb < 0) - (fa > 0) + (fa < 0)) / 2;
}

/// Central-difference Jacobian of a planar field.
template <class Field>
Matrix2 numeric_jacobian(const Field& f, const Point2& x, double h = 1e-6) {
  Matrix2 J;
  for (int j = 0; j < 2; ++j) {
    Point2 e = Point2::Zero();
    e[j] = h * std::max(1.0, std::abs(x[j]));
    J.col(j) = (f(Point2(x + e)) - f(Point2(x - e))) / (2.0 * e[j]);
  }
  return J;
}

}  // namespace eqindex
