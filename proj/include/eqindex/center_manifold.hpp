#pragma once

// Quadratic approximation of the local center manifold of u = 0 at the
// eigenvalue lambda0 = k^2 and the reduced vector field on the kernel.
//
// For k >= 1 the kernel is span{e1, e2} = span{sin kx, cos kx}/sqrt(pi) and
//   phi(c1 e1 + c2 e2) = c1^2 v1 + 2 c1 c2 v0 + c2^2 v2,   L v_i = w_i,
// with w_i the X2-components of a e1^2, a e1 e2, a e2^2. For k = 0 the kernel
// is the constant mode and the same construction is one-dimensional.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "eqindex/linearization.hpp"
#include "eqindex/spectral_core.hpp"

namespace eqindex {

inline std::vector<FourierVector> kernel_basis(int truncation, int k) {
  if (k < 0 || k > truncation) throw ValidationError("kernel wavenumber outside the truncation");
  if (k == 0) return {FourierVector::basis(truncation, {0, Parity::constant})};
  return {FourierVector::basis(truncation, {k, Parity::sine}), FourierVector::basis(truncation, {k, Parity::cosine})};
}

/// L = A - lambda0 restricted to the complement of the kernel.
inline FourierVector apply_L(const FourierVector& u, double lambda0) { return apply_A(u) - lambda0 * u; }

class QuadraticManifold {
 public:
  QuadraticManifold() = default;
  QuadraticManifold(int k, int truncation, std::vector<FourierVector> kernel,
                    std::vector<std::vector<FourierVector>> w, std::vector<std::vector<FourierVector>> v)
      : k_(k), truncation_(truncation), kernel_(std::move(kernel)), w_(std::move(w)), v_(std::move(v)) {}

  int k() const { return k_; }
  double lambda0() const { return double(k_) * double(k_); }
  int truncation() const { return truncation_; }
  int dim() const { return int(kernel_.size()); }
  const std::vector<FourierVector>& kernel() const { return kernel_; }

  const FourierVector& w(int i, int j) const { return w_[i][j]; }
  const FourierVector& v(int i, int j) const { return v_[i][j]; }
  FourierVector& v_mut(int i, int j) { return v_[i][j]; }

  // Planar names: v1 <-> c1^2, v0 <-> 2 c1 c2, v2 <-> c2^2.
  const FourierVector& v1() const { return v_[0][0]; }
  const FourierVector& v0() const { return v_[0][1]; }
  const FourierVector& v2() const { return v_[1][1]; }
  const FourierVector& w1() const { return w_[0][0]; }
  const FourierVector& w0() const { return w_[0][1]; }
  const FourierVector& w2() const { return w_[1][1]; }

  FourierVector kernel_vector(const Vector& c) const {
    FourierVector u(truncation_);
    for (int i = 0; i < dim(); ++i) u += c[i] * kernel_[i];
    return u;
  }

  FourierVector phi(const Vector& c) const {
    FourierVector out(truncation_);
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j) out += (c[i] * c[j]) * v_[i][j];
    return out;
  }

  /// d phi / d c_j = 2 sum_i c_i v_ij.
  std::vector<FourierVector> dphi(const Vector& c) const {
    std::vector<FourierVector> d(dim(), FourierVector(truncation_));
    for (int j = 0; j < dim(); ++j)
      for (int i = 0; i < dim(); ++i) d[j] += (2.0 * c[i]) * v_[i][j];
    return d;
  }

  /// u1 + phi(u1): a point of the approximate manifold in full coordinates.
  FourierVector lift(const Vector& c) const { return kernel_vector(c) + phi(c); }

  Vector kernel_coordinates(const FourierVector& u) const {
    Vector c(dim());
    for (int i = 0; i < dim(); ++i) c[i] = inner_product(u, kernel_[i]);
    return c;
  }

 private:
  int k_ = 1;
  int truncation_ = 0;
  std::vector<FourierVector> kernel_;
  std::vector<std::vector<FourierVector>> w_, v_;
};

inline QuadraticManifold quadratic_coefficients(const ProblemSpec& spec, int k) {
  spec.validate();
  const int N = spec.truncation;
  auto kernel = kernel_basis(N, k);
  const double lambda0 = double(k) * double(k);
  const int d = int(kernel.size());
  std::vector<std::vector<FourierVector>> w(d, std::vector<FourierVector>(d, FourierVector(N)));
  auto v = w;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      FourierVector wij = exact_product(spec.a, exact_product(kernel[i], kernel[j])).resized(N);
      for (const auto& e : kernel) wij -= inner_product(wij, e) * e;
      FourierVector vij(N);
      for (int idx = 0; idx < vij.size(); ++idx) {
        const double ln = TrigMode::from_index(idx).eigenvalue() - lambda0;
        if (ln != 0.0) vij[idx] = wij[idx] / ln;
      }
      w[i][j] = w[j][i] = wij;
      v[i][j] = v[j][i] = vij;
    }
  }
  return {k, N, std::move(kernel), std::move(w), std::move(v)};
}

class ReducedField {
 public:
  ReducedField(ProblemSpec spec, QuadraticManifold manifold)
      : spec_(std::move(spec)), manifold_(std::move(manifold)) {
    const int d = manifold_.dim();
    const auto& e = manifold_.kernel();
    b_.assign(d, std::vector<std::vector<double>>(d, std::vector<double>(d, 0.0)));
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) {
        const FourierVector ael = exact_product(spec_.a, exact_product(e[j], e[l])).resized(spec_.truncation);
        for (int i = 0; i < d; ++i) b_[i][j][l] = inner_product(ael, e[i]);
      }
  }

  ReducedField(const ProblemSpec& spec, int k) : ReducedField(spec, quadratic_coefficients(spec, k)) {}

  const ProblemSpec& spec() const { return spec_; }
  const QuadraticManifold& manifold() const { return manifold_; }
  int dim() const { return manifold_.dim(); }
  double lambda0() const { return manifold_.lambda0(); }

  /// <a e_j e_l, e_i>.
  double b(int i, int j, int l) const { return b_[i][j][l]; }

  /// (B_1, ..., B_d): the quadratic part at lambda0 with phi and h dropped.
  Vector quadratic(const Vector& c) const {
    Vector out = Vector::Zero(dim());
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j)
        for (int l = 0; l < dim(); ++l) out[i] += b_[i][j][l] * c[j] * c[l];
    return out;
  }

  /// c' = (lambda - lambda0) c + <g(u1 + phi(u1)), e_i>.
  Vector operator()(const Vector& c, double lambda) const {
    const FourierVector u = manifold_.lift(c);
    const FourierVector g = nonlinearity_exact(sorted_spec(), u).resized(spec_.truncation);
    Vector out(dim());
    for (int i = 0; i < dim(); ++i) out[i] = (lambda - lambda0()) * c[i] + inner_product(g, manifold_.kernel()[i]);
    return out;
  }

  Matrix jacobian(const Vector& c, double lambda) const {
    const FourierVector u = manifold_.lift(c);
    const FourierVector gp = nonlinearity_derivative_exact(sorted_spec(), u);
    const auto dphi = manifold_.dphi(c);
    Matrix J(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
      const FourierVector dir = manifold_.kernel()[j] + dphi[j];
      const FourierVector col = exact_product(gp, dir).resized(spec_.truncation);
      for (int i = 0; i < dim(); ++i) J(i, j) = inner_product(col, manifold_.kernel()[i]);
    }
    J.diagonal().array() += lambda - lambda0();
    return J;
  }

 private:
  ProblemSpec sorted_spec() const {
    ProblemSpec s = spec_;
    s.h_terms = detail::sorted_terms(spec_.h_terms);
    return s;
  }

  ProblemSpec spec_;
  QuadraticManifold manifold_;
  std::vector<std::vector<std::vector<double>>> b_;
};

inline std::pair<double, double> reduced_vector_field(const ReducedField& rf, double c1, double c2, double lambda) {
  if (rf.dim() != 2) throw DimensionError("reduced_vector_field: planar reduction expected");
  const Vector f = rf(Vector{{c1, c2}}, lambda);
  return {f[0], f[1]};
}

struct OrderCheckResult {
  double slope = 0.0;
  bool identically_zero = false;
  std::vector<OrderCheckFailure::Row> table;
};

/// Delta(u1) = phi'(u1)[L u1 - P1 g] - [L phi(u1) - P2 g], g = g(u1 + phi(u1)).
inline FourierVector manifold_defect(const ProblemSpec& spec, const QuadraticManifold& mf, const Vector& c) {
  ProblemSpec s = spec;
  s.h_terms = detail::sorted_terms(spec.h_terms);
  const FourierVector u1 = mf.kernel_vector(c);
  const FourierVector ph = mf.phi(c);
  const FourierVector g = nonlinearity_exact(s, u1 + ph).resized(spec.truncation);
  FourierVector p1g(spec.truncation);
  for (const auto& e : mf.kernel()) p1g += inner_product(g, e) * e;
  const FourierVector p2g = g - p1g;

  const FourierVector tangent_arg = apply_L(u1, mf.lambda0()) - p1g;
  const Vector tc = mf.kernel_coordinates(tangent_arg);
  const auto dphi = mf.dphi(c);
  FourierVector first(spec.truncation);
  for (int j = 0; j < mf.dim(); ++j) first += tc[j] * dphi[j];
  return first - (apply_L(ph, mf.lambda0()) - p2g);
}

/// Log-log slope of max ||Delta|| over circles (or the two points +-r in the
/// one-dimensional case) of each radius. Throws OrderCheckFailure when the
/// slope is below `min_slope`.
inline OrderCheckResult residual_order_check(const ProblemSpec& spec, const QuadraticManifold& mf,
                                             const std::vector<double>& radii, int samples = 64,
                                             double min_slope = 2.9) {
  if (radii.size() < 2) throw ValidationError("residual_order_check: at least two radii required");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 1e-5) throw ValidationError("residual_order_check: radius below 1e-5");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw ValidationError("residual_order_check: radii must descend");
  }
  OrderCheckResult out;
  bool all_zero = true;
  for (double r : radii) {
    double worst = 0.0;
    if (mf.dim() == 1) {
      for (double sgn : {1.0, -1.0}) worst = std::max(worst, manifold_defect(spec, mf, Vector::Constant(1, sgn * r)).norm());
    } else {
      for (int s = 0; s < samples; ++s) {
        const double th = 2.0 * std::numbers::pi * s / samples;
        worst = std::max(worst, manifold_defect(spec, mf, Vector{{r * std::cos(th), r * std::sin(th)}}).norm());
      }
    }
    // Below this the defect is rounding in the cancelled quadratic terms.
    if (worst > 64.0 * std::numeric_limits<double>::epsilon() * r * r) all_zero = false;
    out.table.push_back({r, worst});
  }
  if (all_zero) {
    out.identically_zero = true;
    out.slope = std::numeric_limits<double>::infinity();
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(out.table.size());
  for (const auto& row : out.table) {
    const double x = std::log(row.radius), y = std::log(std::max(row.residual, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (out.slope < min_slope)
    throw OrderCheckFailure("manifold residual decays with slope " + std::to_string(out.slope) + " < " +
                                std::to_string(min_slope),
                            out.slope, out.table);
  return out;
}

inline OrderCheckResult residual_order_check(const ProblemSpec& spec, int k, const std::vector<double>& radii) {
  return residual_order_check(spec, quadratic_coefficients(spec, k), radii);
}

struct DominanceCheck {
  double radius = 0.0;
  double min_quadratic = 0.0;  // min |B(c)| over |c| = radius
  double max_remainder = 0.0;  // max |f(c, lambda0) - B(c)| over |c| = radius
  double kappa = 0.0;          // max_remainder / radius^3
  bool applicable = false;     // false when B vanishes identically
  bool ok = true;
};

/// Boundary check that the cubic remainder of the reduced field at lambda0
/// cannot flip the direction of its quadratic part on the sphere |c| = radius.
inline DominanceCheck quadratic_dominance(const ReducedField& rf, double radius, int samples = 256) {
  if (!(radius > 0)) throw ValidationError("quadratic_dominance: radius must be positive");
  DominanceCheck out;
  out.radius = radius;
  out.min_quadratic = 1e300;
  double max_quadratic = 0.0;
  const int n = rf.dim() == 1 ? 2 : samples;
  for (int i = 0; i < n; ++i) {
    Vector c(rf.dim());
    if (rf.dim() == 1) {
      c[0] = i == 0 ? radius : -radius;
    } else {
      const double th = 2.0 * std::numbers::pi * i / n;
      c << radius * std::cos(th), radius * std::sin(th);
    }
    const Vector q = rf.quadratic(c);
    out.min_quadratic = std::min(out.min_quadratic, q.norm());
    max_quadratic = std::max(max_quadratic, q.norm());
    out.max_remainder = std::max(out.max_remainder, (rf(c, rf.lambda0()) - q).norm());
  }
  out.kappa = out.max_remainder / (radius * radius * radius);
  out.applicable = max_quadratic > 0.0;
  out.ok = !out.applicable || out.min_quadratic > out.max_remainder;
  return out;
}

struct Definiteness {
  bool definite = false;
  double gamma = 0.0;
};

/// Minimum eigenvalue of the symmetric matrix of B_i; `i` is 1 or 2.
inline Definiteness bilinear_definiteness(const ReducedField& rf, int i, double tol_def = 1e-10) {
  if (rf.dim() != 2) throw DimensionError("bilinear_definiteness: planar reduction expected");
  if (i != 1 && i != 2) throw ValidationError("bilinear_definiteness: form index must be 1 or 2");
  const int r = i - 1;
  const double p = rf.b(r, 0, 0), q = rf.b(r, 0, 1), s = rf.b(r, 1, 1);
  const double mean = 0.5 * (p + s), rad = std::hypot(0.5 * (p - s), q);
  const double gamma = mean - rad;
  return {gamma > tol_def, gamma};
}

}  // namespace eqindex
