#pragma once

// Trigonometric eigenbasis of A = -d^2/dx^2 on [-pi, pi] with periodic
// boundary conditions, and the Galerkin form of  -u'' = lambda u + g(x, u).
//
// Coefficients are stored in the fixed order
//   [const, sin 1, cos 1, sin 2, cos 2, ..., sin N, cos N]
// against the orthonormal functions
//   e0 = 1/sqrt(2 pi),  sin(nx)/sqrt(pi),  cos(nx)/sqrt(pi).

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqindex/errors.hpp"

namespace eqindex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Parity { constant, sine, cosine };

struct TrigMode {
  int n = 0;
  Parity parity = Parity::constant;

  static TrigMode from_index(int i) {
    if (i == 0) return {0, Parity::constant};
    return {(i + 1) / 2, (i % 2 == 1) ? Parity::sine : Parity::cosine};
  }

  int index() const {
    switch (parity) {
      case Parity::constant: return 0;
      case Parity::sine: return 2 * n - 1;
      case Parity::cosine: return 2 * n;
    }
    return 0;
  }

  double eigenvalue() const { return double(n) * double(n); }

  double value(double x) const {
    constexpr double pi = std::numbers::pi;
    switch (parity) {
      case Parity::constant: return 1.0 / std::sqrt(2.0 * pi);
      case Parity::sine: return std::sin(n * x) / std::sqrt(pi);
      case Parity::cosine: return std::cos(n * x) / std::sqrt(pi);
    }
    return 0.0;
  }
};

inline int mode_count(int truncation) { return 2 * truncation + 1; }

class FourierVector {
 public:
  FourierVector() : FourierVector(0) {}
  explicit FourierVector(int truncation)
      : truncation_(checked(truncation)), coeffs_(Vector::Zero(mode_count(truncation))) {}
  FourierVector(int truncation, Vector coeffs) : truncation_(checked(truncation)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != mode_count(truncation))
      throw DimensionError("coefficient array of length " + std::to_string(coeffs_.size()) +
                           " does not match truncation " + std::to_string(truncation));
  }

  static FourierVector basis(int truncation, TrigMode mode) {
    FourierVector v(truncation);
    if (mode.n > truncation) throw DimensionError("mode above truncation");
    v.coeffs_[mode.index()] = 1.0;
    return v;
  }

  int truncation() const noexcept { return truncation_; }
  int size() const noexcept { return int(coeffs_.size()); }
  const Vector& coeffs() const noexcept { return coeffs_; }
  Vector& coeffs() noexcept { return coeffs_; }

  double operator[](int i) const { return coeffs_[i]; }
  double& operator[](int i) { return coeffs_[i]; }
  double operator[](TrigMode m) const { return m.n > truncation_ ? 0.0 : coeffs_[m.index()]; }

  double norm() const { return coeffs_.norm(); }
  bool is_zero() const { return coeffs_.isZero(0.0); }

  /// Drops modes above `n` or pads with zeros.
  FourierVector resized(int n) const {
    FourierVector out(n);
    const int common = std::min(size(), out.size());
    out.coeffs_.head(common) = coeffs_.head(common);
    return out;
  }

  /// Highest wavenumber carrying a nonzero coefficient.
  int degree() const {
    for (int i = size() - 1; i > 0; --i)
      if (coeffs_[i] != 0.0) return TrigMode::from_index(i).n;
    return 0;
  }

  double evaluate(double x) const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += coeffs_[i] * TrigMode::from_index(i).value(x);
    return s;
  }

  FourierVector& operator+=(const FourierVector& o) {
    require_same(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  FourierVector& operator-=(const FourierVector& o) {
    require_same(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  FourierVector& operator*=(double s) {
    coeffs_ *= s;
    return *this;
  }
  friend FourierVector operator+(FourierVector a, const FourierVector& b) { return a += b; }
  friend FourierVector operator-(FourierVector a, const FourierVector& b) { return a -= b; }
  friend FourierVector operator*(double s, FourierVector a) { return a *= s; }
  friend FourierVector operator*(FourierVector a, double s) { return a *= s; }

  void require_same(const FourierVector& o) const {
    if (o.truncation_ != truncation_)
      throw DimensionError("truncation mismatch: " + std::to_string(truncation_) + " vs " +
                           std::to_string(o.truncation_));
  }

 private:
  static int checked(int truncation) {
    if (truncation < 0) throw DimensionError("negative truncation");
    return truncation;
  }

  int truncation_;
  Vector coeffs_;
};

inline double inner_product(const FourierVector& u, const FourierVector& v) {
  u.require_same(v);
  return u.coeffs().dot(v.coeffs());
}

/// Diagonal action of A: multiplies each mode by n^2.
inline FourierVector apply_A(const FourierVector& u) {
  FourierVector out(u.truncation());
  for (int i = 1; i < u.size(); ++i) out[i] = TrigMode::from_index(i).eigenvalue() * u[i];
  return out;
}

inline Vector operator_eigenvalues(int truncation) {
  Vector d(mode_count(truncation));
  for (int i = 0; i < d.size(); ++i) d[i] = TrigMode::from_index(i).eigenvalue();
  return d;
}

namespace detail {

// u(x) = sum_{n=-N..N} z_n e^{inx}; stored with offset N.
inline std::vector<std::complex<double>> to_exponential(const FourierVector& u) {
  constexpr double pi = std::numbers::pi;
  const int N = u.truncation();
  std::vector<std::complex<double>> z(2 * N + 1);
  z[N] = u[0] / std::sqrt(2.0 * pi);
  const double s = 1.0 / std::sqrt(pi);
  for (int n = 1; n <= N; ++n) {
    const double S = u[2 * n - 1] * s;
    const double C = u[2 * n] * s;
    z[N + n] = {0.5 * C, -0.5 * S};
    z[N - n] = {0.5 * C, 0.5 * S};
  }
  return z;
}

inline FourierVector from_exponential(const std::vector<std::complex<double>>& z) {
  constexpr double pi = std::numbers::pi;
  const int N = int(z.size() / 2);
  FourierVector u(N);
  u[0] = z[N].real() * std::sqrt(2.0 * pi);
  const double s = std::sqrt(pi);
  for (int n = 1; n <= N; ++n) {
    const auto zn = 0.5 * (z[N + n] + std::conj(z[N - n]));
    u[2 * n] = 2.0 * zn.real() * s;
    u[2 * n - 1] = -2.0 * zn.imag() * s;
  }
  return u;
}

}  // namespace detail

/// Exact product: the result has truncation deg(u) + deg(v), nothing is lost.
inline FourierVector exact_product(const FourierVector& u, const FourierVector& v) {
  const auto zu = detail::to_exponential(u);
  const auto zv = detail::to_exponential(v);
  const int Nu = u.truncation(), Nv = v.truncation(), Nw = Nu + Nv;
  std::vector<std::complex<double>> zw(2 * Nw + 1);
  for (int i = 0; i < int(zu.size()); ++i) {
    if (zu[i] == 0.0) continue;
    for (int j = 0; j < int(zv.size()); ++j) {
      if (zv[j] == 0.0) continue;
      zw[(i - Nu) + (j - Nv) + Nw] += zu[i] * zv[j];
    }
  }
  return detail::from_exponential(zw);
}

/// Product of two functions, truncated back to wavenumber N.
inline FourierVector pointwise_product(const FourierVector& u, const FourierVector& v) {
  u.require_same(v);
  return exact_product(u, v).resized(u.truncation());
}

inline FourierVector exact_power(const FourierVector& u, int p) {
  FourierVector out = FourierVector::basis(0, {0, Parity::constant}) * std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < p; ++i) out = exact_product(out, u);
  return out;
}

/// Galerkin matrix M[w]_{ij} = <w e_j, e_i> on the truncation-N basis.
/// `w` may carry modes above N; they couple low modes exactly.
inline Matrix multiplication_matrix(const FourierVector& w, int truncation) {
  const int m = mode_count(truncation);
  Matrix M(m, m);
  for (int j = 0; j < m; ++j) {
    const auto col = exact_product(w, FourierVector::basis(truncation, TrigMode::from_index(j)));
    for (int i = 0; i < m; ++i) M(i, j) = i < col.size() ? col[i] : 0.0;
  }
  return 0.5 * (M + M.transpose());
}

struct NonlinearTerm {
  int power = 3;
  FourierVector coefficient;
};

/// g(x, u) = a(x) u^2 + sum_p c_p(x) u^p with every p >= 3.
struct ProblemSpec {
  int truncation = 32;
  FourierVector a{0};
  std::vector<NonlinearTerm> h_terms;

  int dimension() const { return mode_count(truncation); }

  void validate() const {
    if (truncation < 1) throw ValidationError("truncation N must be >= 1");
    if (a.truncation() > truncation)
      throw ValidationError("a(x) has truncation " + std::to_string(a.truncation()) + " above N = " +
                            std::to_string(truncation));
    for (const auto& t : h_terms) {
      if (t.power < 3)
        throw ValidationError("h term of power " + std::to_string(t.power) + " violates h = O(|u|^3)");
      if (t.coefficient.truncation() > truncation)
        throw ValidationError("h coefficient with truncation above N");
    }
  }

  /// a = 0 and every c_p constant: translation and reflection equivariant, so
  /// nontrivial equilibria off the constant mode come in circles.
  bool is_o2_symmetric() const {
    for (int i = 0; i < a.size(); ++i)
      if (a[i] != 0.0) return false;
    for (const auto& t : h_terms)
      for (int i = 1; i < t.coefficient.size(); ++i)
        if (t.coefficient[i] != 0.0) return false;
    return true;
  }

  /// All coefficient functions even in x: the cosine subspace is invariant.
  bool is_even() const {
    auto even = [](const FourierVector& f) {
      for (int n = 1; n <= f.truncation(); ++n)
        if (f[2 * n - 1] != 0.0) return false;
      return true;
    };
    if (!even(a)) return false;
    for (const auto& t : h_terms)
      if (!even(t.coefficient)) return false;
    return true;
  }
};

/// g(u) computed exactly (no truncation of intermediate products).
inline FourierVector nonlinearity_exact(const ProblemSpec& spec, const FourierVector& u) {
  FourierVector u2 = exact_product(u, u);
  FourierVector g = exact_product(spec.a, u2);
  FourierVector up = u2;
  int p = 2;
  for (const auto& t : spec.h_terms) {
    while (p < t.power) {
      up = exact_product(up, u);
      ++p;
    }
    FourierVector term = exact_product(t.coefficient, up);
    const int n = std::max(term.truncation(), g.truncation());
    g = g.resized(n) + term.resized(n);
  }
  return g;
}

/// g'(u) as a function: 2 a u + sum_p p c_p u^{p-1}.
inline FourierVector nonlinearity_derivative_exact(const ProblemSpec& spec, const FourierVector& u) {
  FourierVector g = 2.0 * exact_product(spec.a, u);
  FourierVector up = u;  // u^{p-1}
  int q = 1;
  for (const auto& t : spec.h_terms) {
    while (q < t.power - 1) {
      up = exact_product(up, u);
      ++q;
    }
    FourierVector term = double(t.power) * exact_product(t.coefficient, up);
    const int n = std::max(term.truncation(), g.truncation());
    g = g.resized(n) + term.resized(n);
  }
  return g;
}

namespace detail {
inline std::vector<NonlinearTerm> sorted_terms(std::vector<NonlinearTerm> terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const NonlinearTerm& x, const NonlinearTerm& y) { return x.power < y.power; });
  return terms;
}
}  // namespace detail

/// F(u, lambda) = A u - lambda u - Pi_N g(u).
inline FourierVector galerkin_residual(const ProblemSpec& spec, const FourierVector& u, double lambda) {
  if (u.truncation() != spec.truncation) throw DimensionError("state truncation differs from spec N");
  ProblemSpec s = spec;
  s.h_terms = detail::sorted_terms(spec.h_terms);
  FourierVector r = apply_A(u) - lambda * u;
  r -= nonlinearity_exact(s, u).resized(spec.truncation);
  return r;
}

/// J(u, lambda) = diag(n^2) - lambda I - M[g'(u)]; symmetric.
inline Matrix galerkin_jacobian(const ProblemSpec& spec, const FourierVector& u, double lambda) {
  if (u.truncation() != spec.truncation) throw DimensionError("state truncation differs from spec N");
  ProblemSpec s = spec;
  s.h_terms = detail::sorted_terms(spec.h_terms);
  Matrix J = -multiplication_matrix(nonlinearity_derivative_exact(s, u), spec.truncation);
  J.diagonal().array() += operator_eigenvalues(spec.truncation).array() - lambda;
  return J;
}

/// -dF/dlambda = u, so dF/dlambda = -u.
inline Vector galerkin_dlambda(const FourierVector& u) { return -u.coeffs(); }

}  // namespace eqindex
