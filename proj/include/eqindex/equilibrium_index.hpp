#pragma once

// Equilibrium index at Galerkin level: Ind = sum of sign det J_F over the
// nondegenerate zeros of F(., lambda) in a ball or shell of coefficient
// space, found by multistart Newton. Also the conjugacy, continuation and
// reduction-identity checks built on it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqindex/center_manifold.hpp"
#include "eqindex/linearization.hpp"
#include "eqindex/parallel.hpp"
#include "eqindex/planar_degree.hpp"
#include "eqindex/random.hpp"
#include "eqindex/spectral_core.hpp"

namespace eqindex {

/// A square system x -> F(x) with its Jacobian.
struct EquationSystem {
  int dim = 0;
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> jacobian;
};

/// {x : r_in < |M x| < r_out}; M = identity when `map` is empty. A ball is
/// the case r_in = 0.
struct ShellRegion {
  double r_in = 0.0;
  double r_out = 1.0;
  Matrix map;

  static ShellRegion ball(double r) { return {0.0, r, {}}; }
  static ShellRegion shell(double r_in, double r_out) {
    if (!(r_in > 0) || !(r_in < r_out)) throw ValidationError("shell requires 0 < r_in < r_out");
    return {r_in, r_out, {}};
  }

  double radius_of(const Vector& x) const { return map.size() ? (map * x).norm() : x.norm(); }
  /// Distance-like margin to the boundary (positive inside).
  double depth(const Vector& x) const {
    const double r = radius_of(x);
    return r_in > 0 ? std::min(r_out - r, r - r_in) : r_out - r;
  }
  bool contains(const Vector& x) const { return depth(x) > 0; }
};

struct NewtonOptions {
  double tol = 1e-11;
  int max_iterations = 60;
  double dedup_radius = 1e-6;
  double singular_tol = 1e-8;  // smallest singular value below this: degenerate
};

inline std::optional<Vector> newton_solve(const EquationSystem& sys, Vector x, const NewtonOptions& opt,
                                          double escape_radius) {
  Vector fx = sys.residual(x);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (fx.norm() <= opt.tol) return x;
    const Eigen::PartialPivLU<Matrix> lu(sys.jacobian(x));
    const Vector dx = -lu.solve(fx);
    if (!dx.allFinite()) return std::nullopt;
    double t = 1.0;
    Vector xn = x + dx, fn = sys.residual(xn);
    while (!(fn.norm() <= (1.0 - 0.25 * t) * fx.norm()) && t > 1.0 / 1024) {
      t *= 0.5;
      xn = x + t * dx;
      fn = sys.residual(xn);
    }
    if (!(xn.norm() < escape_radius) || !fn.allFinite()) return std::nullopt;
    if ((xn - x).norm() <= 1e-15 * (1.0 + x.norm())) return fn.norm() <= 1e3 * opt.tol ? std::optional(xn) : std::nullopt;
    x = std::move(xn);
    fx = std::move(fn);
  }
  return fx.norm() <= opt.tol ? std::optional(x) : std::nullopt;
}

struct LocatedZero {
  Vector x;
  int sign = 0;
  double sigma_min = 0.0;
};

inline LocatedZero classify_zero(const EquationSystem& sys, const Vector& x) {
  const Matrix J = sys.jacobian(x);
  const Eigen::PartialPivLU<Matrix> lu(J);
  const double det = lu.determinant();
  const Eigen::JacobiSVD<Matrix> svd(J);
  return {x, det > 0 ? 1 : (det < 0 ? -1 : 0), svd.singularValues()[svd.singularValues().size() - 1]};
}

/// Newton from every seed (in parallel), deduplicated in seed order.
inline std::vector<LocatedZero> multistart_zeros(const EquationSystem& sys, const std::vector<Vector>& seeds,
                                                 const NewtonOptions& opt, double escape_radius,
                                                 int threads = thread_count()) {
  const auto results = parallel_map(
      int(seeds.size()), [&](int i) { return newton_solve(sys, seeds[i], opt, escape_radius); }, threads);
  std::vector<LocatedZero> zeros;
  for (const auto& r : results) {
    if (!r) continue;
    bool dup = false;
    for (const auto& z : zeros)
      if ((z.x - *r).norm() < opt.dedup_radius) dup = true;
    if (!dup) zeros.push_back(classify_zero(sys, *r));
  }
  return zeros;
}

/// Sum of sign det J over the zeros inside `region`; throws on zeros at the
/// boundary and on degenerate zeros.
inline IndexReport zero_count_index(const EquationSystem& sys, const ShellRegion& region,
                                    const std::vector<Vector>& seeds, const NewtonOptions& opt = {},
                                    int threads = thread_count()) {
  const double escape = 4.0 * region.r_out * (region.map.size() ? std::max(1.0, region.map.inverse().norm()) : 1.0) + 1.0;
  IndexReport rep;
  rep.method = IndexReport::Method::zero_count;
  rep.margin = std::numeric_limits<double>::infinity();
  for (const auto& z : multistart_zeros(sys, seeds, opt, escape, threads)) {
    const double d = region.depth(z.x);
    if (std::abs(d) <= opt.dedup_radius)
      throw BoundaryZeroError("equilibrium on the region boundary",
                              std::vector<double>(z.x.data(), z.x.data() + z.x.size()));
    if (d < 0) continue;
    if (z.sigma_min < opt.singular_tol)
      throw DegenerateZeroError("degenerate equilibrium, smallest singular value " + std::to_string(z.sigma_min),
                                std::vector<double>(z.x.data(), z.x.data() + z.x.size()));
    rep.index += z.sign;
    rep.margin = std::min(rep.margin, d);
    rep.witnesses.push_back({std::vector<double>(z.x.data(), z.x.data() + z.x.size()), z.sign, 0.0});
  }
  return rep;
}

struct GalerkinIndexOptions {
  NewtonOptions newton;
  int random_seeds = 24;
  std::uint32_t seed = 1;
  double reduced_radius = 0.1;  // kernel-plane search radius for lifted seeds
  /// Adds eta * (P_sin,k - P_cos,k) u to F; breaks the O(2) circle of zeros.
  double symmetry_breaking = 0.0;
  std::optional<int> kernel_k;  // wavenumber used for reduced seeding
  std::vector<Vector> extra_seeds;
  int threads = thread_count();
};

inline Matrix symmetry_breaking_matrix(int truncation, int k, double eta) {
  Matrix D = Matrix::Zero(mode_count(truncation), mode_count(truncation));
  if (eta == 0.0 || k == 0) return D;
  D(TrigMode{k, Parity::sine}.index(), TrigMode{k, Parity::sine}.index()) = eta;
  D(TrigMode{k, Parity::cosine}.index(), TrigMode{k, Parity::cosine}.index()) = -eta;
  return D;
}

inline EquationSystem galerkin_system(const ProblemSpec& spec, double lambda, double eta = 0.0, int k = 1) {
  const Matrix D = symmetry_breaking_matrix(spec.truncation, k, eta);
  const int N = spec.truncation;
  ProblemSpec s = spec;
  s.h_terms = detail::sorted_terms(spec.h_terms);
  EquationSystem sys;
  sys.dim = spec.dimension();
  sys.residual = [s, lambda, D, N](const Vector& x) -> Vector {
    return galerkin_residual(s, FourierVector(N, x), lambda).coeffs() + D * x;
  };
  sys.jacobian = [s, lambda, D, N](const Vector& x) -> Matrix {
    return galerkin_jacobian(s, FourierVector(N, x), lambda) + D;
  };
  return sys;
}

/// Kernel-plane zeros of the reduced field (flow sign) at lambda within a disk.
/// The same symmetry-breaking term as the full system is included.
inline std::vector<Vector> reduced_zeros(const ReducedField& rf, double lambda, double radius, double eta = 0.0,
                                         bool include_degenerate = true) {
  std::vector<Vector> out;
  if (rf.dim() == 1) {
    auto f = [&](double c) { return rf(Vector::Constant(1, c), lambda)[0]; };
    const int n = 400;
    double prev = f(-radius);
    for (int i = 1; i <= n; ++i) {
      double a = -radius + 2.0 * radius * (i - 1) / n, b = -radius + 2.0 * radius * i / n;
      const double fb = f(b);
      if (prev == 0.0) out.push_back(Vector::Constant(1, a));
      if (prev * fb < 0) {
        double fa = prev;
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
          const double m = 0.5 * (a + b), fm = f(m);
          if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
        out.push_back(Vector::Constant(1, 0.5 * (a + b)));
      }
      prev = fb;
    }
    return out;
  }
  auto field = [&](const Point2& p) -> Point2 {
    const Vector v = rf(Vector{{p.x(), p.y()}}, lambda);
    return {v[0] - eta * p.x(), v[1] + eta * p.y()};
  };
  auto jac = [&](const Point2& p) -> Matrix2 {
    Matrix2 J = rf.jacobian(Vector{{p.x(), p.y()}}, lambda);
    J(0, 0) -= eta;
    J(1, 1) += eta;
    return J;
  };
  ZeroCountOptions zopt;
  zopt.grid = 21;
  for (const auto& z : locate_planar_zeros(field, jac, PlanarRegion::disk(Point2::Zero(), radius), zopt))
    if (include_degenerate || std::abs(z.det) > zopt.det_tol) out.push_back(Vector{{z.x.x(), z.x.y()}});
  return out;
}

/// Newton starts for the full system: lifted reduced zeros, the origin, and
/// pseudo-random points of the region.
inline std::vector<Vector> galerkin_seeds(const ProblemSpec& spec, double lambda, const ShellRegion& region,
                                          const GalerkinIndexOptions& opt) {
  const int m = spec.dimension();
  std::vector<Vector> seeds;
  seeds.push_back(Vector::Zero(m));
  int k;
  if (opt.kernel_k) {
    k = *opt.kernel_k;
  } else {
    k = int(std::lround(std::sqrt(std::max(0.0, lambda))));
  }
  if (k <= spec.truncation) {
    const ReducedField rf(spec, k);
    const double search = std::max(opt.reduced_radius, region.r_out);
    for (const auto& c : reduced_zeros(rf, lambda, search, opt.symmetry_breaking)) seeds.push_back(rf.manifold().lift(c).coeffs());
  }
  for (const auto& s : opt.extra_seeds) seeds.push_back(s);
  Lcg rng(opt.seed);
  for (int i = 0; i < opt.random_seeds; ++i) {
    Vector d(m);
    for (int j = 0; j < m; ++j) d[j] = rng.normal();
    const double r = rng.uniform(region.r_in, region.r_out);
    Vector x = r * d.normalized();
    if (region.map.size()) x = region.map.inverse() * x;
    seeds.push_back(x);
  }
  return seeds;
}

inline IndexReport galerkin_equilibrium_index(const ProblemSpec& spec, double lambda, const ShellRegion& region,
                                              const GalerkinIndexOptions& opt = {}) {
  const int k = opt.kernel_k.value_or(int(std::lround(std::sqrt(std::max(0.0, lambda)))));
  const EquationSystem sys = galerkin_system(spec, lambda, opt.symmetry_breaking, k);
  return zero_count_index(sys, region, galerkin_seeds(spec, lambda, region, opt), opt.newton, opt.threads);
}

/// sign prod (n^2 - lambda): the index of the trivial equilibrium alone.
inline int trivial_index(int truncation, double lambda) {
  int s = 1;
  for (int i = 0; i < mode_count(truncation); ++i) {
    const double d = TrigMode::from_index(i).eigenvalue() - lambda;
    if (d == 0.0) throw DegenerateZeroError("lambda is an eigenvalue of A", {lambda});
    if (d < 0) s = -s;
  }
  return s;
}

struct ConjugacyResult {
  int index_original = 0;
  int index_transformed = 0;
  bool equal = false;
};

/// Compares the index of F over `region` with that of v -> T F(T^{-1} v)
/// over T(region).
inline ConjugacyResult conjugacy_invariance_check(const ProblemSpec& spec, double lambda, const Matrix& T,
                                                  const ShellRegion& region, const GalerkinIndexOptions& opt = {}) {
  const int m = spec.dimension();
  if (T.rows() != m || T.cols() != m) throw DimensionError("conjugacy_invariance_check: T has the wrong size");
  const Eigen::JacobiSVD<Matrix> svd(T);
  const auto& sv = svd.singularValues();
  if (!(sv[0] / sv[sv.size() - 1] < 1e6)) throw ValidationError("conjugacy_invariance_check: T is ill-conditioned");
  const Matrix Tinv = T.inverse();

  const int k = opt.kernel_k.value_or(int(std::lround(std::sqrt(std::max(0.0, lambda)))));
  const EquationSystem sys = galerkin_system(spec, lambda, opt.symmetry_breaking, k);
  const auto seeds = galerkin_seeds(spec, lambda, region, opt);

  EquationSystem conj;
  conj.dim = m;
  conj.residual = [sys, T, Tinv](const Vector& v) -> Vector { return T * sys.residual(Tinv * v); };
  conj.jacobian = [sys, T, Tinv](const Vector& v) -> Matrix { return T * sys.jacobian(Tinv * v) * Tinv; };
  ShellRegion image = region;
  image.map = region.map.size() ? Matrix(region.map * Tinv) : Tinv;
  std::vector<Vector> image_seeds;
  for (const auto& s : seeds) image_seeds.push_back(T * s);

  ConjugacyResult out;
  out.index_original = zero_count_index(sys, region, seeds, opt.newton, opt.threads).index;
  out.index_transformed = zero_count_index(conj, image, image_seeds, opt.newton, opt.threads).index;
  out.equal = out.index_original == out.index_transformed;
  return out;
}

struct ContinuationIndexResult {
  bool constant = true;
  std::vector<double> lambdas;
  std::vector<int> indices;
  std::optional<double> isolation_lost_at;  // first lambda where a zero touched the boundary
};

inline ContinuationIndexResult index_continuation_check(const ProblemSpec& spec, double lambda_a, double lambda_b,
                                                        const ShellRegion& region, int steps,
                                                        const GalerkinIndexOptions& opt = {}) {
  if (steps < 2) throw ValidationError("index_continuation_check: at least two samples");
  ContinuationIndexResult out;
  for (int i = 0; i < steps; ++i) {
    const double lambda = lambda_a + (lambda_b - lambda_a) * i / (steps - 1);
    out.lambdas.push_back(lambda);
    try {
      out.indices.push_back(galerkin_equilibrium_index(spec, lambda, region, opt).index);
    } catch (const BoundaryZeroError&) {
      if (!out.isolation_lost_at) out.isolation_lost_at = lambda;
      out.indices.push_back(0);
      out.constant = false;
      continue;
    }
    if (out.indices.back() != out.indices.front()) out.constant = false;
  }
  return out;
}

struct ReductionIdentityResult {
  int lhs = 0;  // full-space index
  int rhs = 0;  // (-1)^m1 times the reduced index
  bool equal = false;
  int m1 = 0, m2 = 0;
  int reduced_degree = 0;  // degree of the reduced flow field
  double r_in = 0.0, r_out = 0.0;
  bool shell = false;
  std::vector<Vector> reduced_zeros;
};

struct ReductionOptions {
  GalerkinIndexOptions index;
  double search_radius = 0.1;  // kernel-plane radius in which reduced zeros are sought
};

/// Full-space index over a shell around the nontrivial reduced zeros (or a
/// ball of radius search_radius when there are none) against the reduced
/// index. The reduced flow field f approximates -F on the center manifold,
/// so its index is (-1)^m2 deg f.
inline ReductionIdentityResult reduction_identity_check(const ProblemSpec& spec, int k, double lambda,
                                                        const ReductionOptions& opt = {}) {
  const double lambda0 = double(k) * k;
  const SpectralSplit s0 = split_matrix(galerkin_jacobian(spec, FourierVector(spec.truncation), lambda0));
  const ReducedField rf(spec, k);
  const double eta = opt.index.symmetry_breaking;
  ReductionIdentityResult out;
  out.m1 = s0.m1;
  out.m2 = s0.m2;
  if (out.m2 != rf.dim()) throw ConsistencyError("center dimension differs from the kernel dimension");

  std::vector<double> radii;
  for (const auto& c : reduced_zeros(rf, lambda, opt.search_radius, eta)) {
    if (c.norm() > 1e-9) {
      out.reduced_zeros.push_back(c);
      radii.push_back(c.norm());
    }
  }
  double r_in = 0.0, r_out = opt.search_radius;
  if (!radii.empty()) {
    r_in = 0.5 * *std::min_element(radii.begin(), radii.end());
    r_out = 2.0 * *std::max_element(radii.begin(), radii.end());
    out.shell = true;
  }
  out.r_in = r_in;
  out.r_out = r_out;

  int red = 0;
  if (rf.dim() == 1) {
    auto f = [&](double c) { return rf(Vector::Constant(1, c), lambda)[0]; };
    if (out.shell)
      red = interval_degree(f, r_in, r_out) + interval_degree(f, -r_out, -r_in);
    else
      red = interval_degree(f, -r_out, r_out);
  } else {
    auto field = [&](const Point2& p) -> Point2 {
      const Vector v = rf(Vector{{p.x(), p.y()}}, lambda);
      return {v[0] - eta * p.x(), v[1] + eta * p.y()};
    };
    const PlanarRegion region = out.shell ? PlanarRegion::annulus(Point2::Zero(), r_in, r_out)
                                          : PlanarRegion::disk(Point2::Zero(), r_out);
    red = winding_degree(field, region);
  }
  out.reduced_degree = red;
  const int sign_m1 = (out.m1 % 2) ? -1 : 1;
  const int sign_m2 = (out.m2 % 2) ? -1 : 1;
  out.rhs = sign_m1 * sign_m2 * red;

  GalerkinIndexOptions iopt = opt.index;
  iopt.kernel_k = k;
  iopt.reduced_radius = opt.search_radius;
  const ShellRegion region = out.shell ? ShellRegion::shell(r_in, r_out) : ShellRegion::ball(r_out);
  out.lhs = galerkin_equilibrium_index(spec, lambda, region, iopt).index;
  out.equal = out.lhs == out.rhs;
  return out;
}

}  // namespace eqindex
