#pragma once

// Spectral splitting of a self-adjoint linearization L into unstable
// (mu <= -2 delta), center (|mu| <= delta) and stable (mu >= 2 delta) bands,
// the associated orthogonal projections, the crossing test at an eigenvalue
// of A, and the aligning isomorphism between splittings at nearby parameters.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eqindex/jacobi.hpp"
#include "eqindex/spectral_core.hpp"

namespace eqindex {

struct SpectralSplit {
  Vector eigenvalues;  // ascending
  double delta = 0.0;
  std::vector<int> sigma1, sigma2, sigma3;
  int m1 = 0;
  int m2 = 0;
  Matrix basis;  // orthonormal eigenvectors, columns match `eigenvalues`

  Matrix band_basis(const std::vector<int>& band) const {
    Matrix B(basis.rows(), Eigen::Index(band.size()));
    for (std::size_t j = 0; j < band.size(); ++j) B.col(Eigen::Index(j)) = basis.col(band[j]);
    return B;
  }
};

struct ProjectionSet {
  Matrix P1, P2, P3;

  const Matrix& operator[](int i) const { return i == 1 ? P1 : (i == 2 ? P2 : P3); }
};

/// Band partition of sorted eigenpairs.
///
/// Without a hint, eigenvalues with |mu| <= tol_center form the center band
/// and delta = d/3 with d the smallest remaining |mu|. With a hint the hint
/// itself is the band width, so a splitting can be carried to parameters
/// where the center eigenvalues are small but nonzero.
inline SpectralSplit split_spectrum(const Vector& eigenvalues, const Matrix& eigenvectors,
                                    std::optional<double> delta_hint = std::nullopt,
                                    double tol_center = 1e-8) {
  const Eigen::Index m = eigenvalues.size();
  if (eigenvectors.cols() != m) throw DimensionError("split_spectrum: eigenvector count mismatch");

  std::vector<Eigen::Index> order(m);
  for (Eigen::Index i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto i, auto j) { return eigenvalues[i] < eigenvalues[j]; });

  SpectralSplit s;
  s.eigenvalues.resize(m);
  s.basis.resize(eigenvectors.rows(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    s.eigenvalues[k] = eigenvalues[order[k]];
    s.basis.col(k) = eigenvectors.col(order[k]);
  }

  if (delta_hint) {
    if (!(*delta_hint > 0.0)) throw ValidationError("split_spectrum: delta hint must be positive");
    s.delta = *delta_hint;
    for (Eigen::Index k = 0; k < m; ++k) {
      const double mu = s.eigenvalues[k];
      if (std::abs(mu) <= s.delta)
        s.sigma2.push_back(int(k));
      else if (mu <= -2.0 * s.delta)
        s.sigma1.push_back(int(k));
      else if (mu >= 2.0 * s.delta)
        s.sigma3.push_back(int(k));
      else
        throw SplitError("eigenvalue " + std::to_string(mu) + " lies between the bands for delta = " +
                             std::to_string(s.delta),
                         mu);
    }
  } else {
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k)
      if (std::abs(s.eigenvalues[k]) > tol_center) d = std::min(d, std::abs(s.eigenvalues[k]));
    if (std::isinf(d)) d = 3.0;
    s.delta = d / 3.0;
    if (s.delta <= tol_center) {
      double offending = 0.0;
      for (Eigen::Index k = 0; k < m; ++k)
        if (std::abs(s.eigenvalues[k]) == d) offending = s.eigenvalues[k];
      throw SplitError("no admissible band gap: eigenvalue " + std::to_string(offending) +
                           " is too close to the center tolerance",
                       offending);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      const double mu = s.eigenvalues[k];
      if (std::abs(mu) <= tol_center)
        s.sigma2.push_back(int(k));
      else if (mu < 0)
        s.sigma1.push_back(int(k));
      else
        s.sigma3.push_back(int(k));
    }
  }
  s.m1 = int(s.sigma1.size());
  s.m2 = int(s.sigma2.size());
  return s;
}

inline SpectralSplit split_matrix(const Matrix& L, std::optional<double> delta_hint = std::nullopt,
                                  double tol_center = 1e-8) {
  const auto e = eigendecompose_symmetric(L);
  return split_spectrum(e.values, e.vectors, delta_hint, tol_center);
}

inline ProjectionSet projections(const SpectralSplit& s) {
  auto proj = [&](const std::vector<int>& band) -> Matrix {
    const Matrix B = s.band_basis(band);
    return B * B.transpose();
  };
  return {proj(s.sigma1), proj(s.sigma2), proj(s.sigma3)};
}

/// Index of the eigenvalue of A equal to lambda0, or nullopt.
inline std::optional<int> eigen_wavenumber(double lambda0, double tol = 1e-12) {
  if (lambda0 < -tol) return std::nullopt;
  const double r = std::round(std::sqrt(std::max(0.0, lambda0)));
  if (std::abs(r * r - lambda0) <= tol * std::max(1.0, lambda0)) return int(r);
  return std::nullopt;
}

struct CrossingResult {
  bool satisfied = false;
  int m1 = 0;
  int m2 = 0;
  double delta = 0.0;
  std::vector<double> center_left;   // center eigenvalues of L at lambda0 - nu
  std::vector<double> center_right;  // ... at lambda0 + nu
};

/// Crossing of the center eigenvalues of L = J(0, lambda) through zero.
///
/// The linear vector field is -L, so the center directions are stable
/// (eigenvalues of L positive) for lambda < lambda0 and unstable (negative)
/// for lambda > lambda0. Both band edges lambda0 -/+ nu are sampled.
inline CrossingResult crossing_check(const ProblemSpec& spec, double lambda0, double nu) {
  if (!(nu > 0.0)) throw ValidationError("crossing_check: nu must be positive");
  const auto k = eigen_wavenumber(lambda0);
  if (!k) throw ValidationError("crossing_check: " + std::to_string(lambda0) + " is not an eigenvalue n^2 of A");
  if (*k > spec.truncation) throw ValidationError("crossing_check: eigenvalue above truncation");

  const FourierVector zero(spec.truncation);
  const SpectralSplit at0 = split_matrix(galerkin_jacobian(spec, zero, lambda0));
  CrossingResult out;
  out.m1 = at0.m1;
  out.m2 = at0.m2;
  out.delta = at0.delta;

  auto center_values = [&](double lambda) {
    const SpectralSplit s = split_matrix(galerkin_jacobian(spec, zero, lambda), at0.delta);
    std::vector<double> c;
    for (int i : s.sigma2) c.push_back(s.eigenvalues[i]);
    return std::pair{s, c};
  };
  const double edge = std::min(nu, 0.5 * at0.delta);
  auto [left, cl] = center_values(lambda0 - edge);
  auto [right, cr] = center_values(lambda0 + edge);
  out.center_left = cl;
  out.center_right = cr;
  bool ok = left.m2 == at0.m2 && right.m2 == at0.m2 && left.m1 == at0.m1 && right.m1 == at0.m1;
  for (double mu : cl) ok = ok && mu > 0.0;
  for (double mu : cr) ok = ok && mu < 0.0;
  out.satisfied = ok;
  return out;
}

struct Alignment {
  Matrix T;
  double max_projection_distance = 0.0;  // max_i ||P_lambda^i - P^i||
  double a1_margin = 0.0;                // 1/2 - max distance
};

/// T = sum_j P^j P_lambda^j. Maps X_lambda^i onto X^i and satisfies
/// T P_lambda^i = P^i T; requires ||P_lambda^i - P^i|| < 1/2 for every band.
inline Alignment subspace_align(const ProjectionSet& at_lambda0, const ProjectionSet& at_lambda) {
  Alignment out;
  for (int i = 1; i <= 3; ++i) {
    const Matrix D = at_lambda[i] - at_lambda0[i];
    const double dist = D.isZero(0.0) ? 0.0 : symmetric_norm(0.5 * (D + D.transpose()));
    out.max_projection_distance = std::max(out.max_projection_distance, dist);
  }
  out.a1_margin = 0.5 - out.max_projection_distance;
  if (out.a1_margin <= 0.0)
    throw AlignmentError("projection distance " + std::to_string(out.max_projection_distance) +
                             " violates the 1/2 bound; shrink |lambda - lambda0|",
                         out.max_projection_distance);
  out.T = at_lambda0.P1 * at_lambda.P1 + at_lambda0.P2 * at_lambda.P2 + at_lambda0.P3 * at_lambda.P3;
  return out;
}

/// Largest principal-angle sine between the column spaces of two orthonormal bases.
inline double subspace_gap(const Matrix& U, const Matrix& V) {
  if (U.cols() == 0 && V.cols() == 0) return 0.0;
  const Matrix R = V - U * (U.transpose() * V);
  Eigen::JacobiSVD<Matrix> svd(R);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace eqindex
