#pragma once

// Pseudo-arclength continuation of F(u, lambda) = 0 with a bordered Newton
// corrector, and termination labels for branches leaving the trivial line.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqindex/errors.hpp"
#include "eqindex/spectral_core.hpp"

namespace eqindex {

/// Parameter-dependent system with F(0, lambda) = 0 for every lambda.
struct ParamSystem {
  int dim = 0;
  std::function<Vector(const Vector&, double)> residual;
  std::function<Matrix(const Vector&, double)> jacobian;
  std::function<Vector(const Vector&, double)> dlambda;
  /// Parameters at which the trivial solution loses invertibility.
  std::vector<double> trivial_eigenvalues;
};

struct ContinuationOptions {
  double h_init = 0.01;
  double h_min = 1e-4;
  double h_max = 0.1;
  double newton_tol = 1e-10;
  int max_newton = 12;
  double R_max = 10.0;
  double lambda_min = -1e300;
  double lambda_max = 1e300;
  int max_steps = 2000;
  double eig_tol = 1e-3;
  double reconnect_tol = 1e-4;
  double crossing_step = 1e-3;  // step length used to resolve a trivial crossing
  double loop_tol = 1e-5;
};

enum class Termination { unbounded, trivial_reconnect, loop, budget };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::unbounded: return "Unbounded";
    case Termination::trivial_reconnect: return "TrivialReconnect";
    case Termination::loop: return "Loop";
    case Termination::budget: return "Budget";
  }
  return "";
}

struct BranchPoint {
  Vector u;
  double lambda = 0.0;
  double arclength = 0.0;
  Vector tangent;  // unit vector in (u, lambda)
  int stability = 0;  // negative eigenvalues of the Jacobian
};

struct Branch {
  std::vector<BranchPoint> points;
  double origin_lambda = 0.0;
  Termination termination = Termination::budget;
  double reconnect_lambda = 0.0;
  std::string diagnostics;
};

inline int negative_eigenvalue_count(const Matrix& J) {
  if ((J - J.transpose()).norm() <= 1e-12 * std::max(1.0, J.norm())) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(J, Eigen::EigenvaluesOnly);
    return int((es.eigenvalues().array() < 0).count());
  }
  const Eigen::EigenSolver<Matrix> es(J, false);
  return int((es.eigenvalues().real().array() < 0).count());
}

namespace detail {

inline Matrix bordered(const ParamSystem& sys, const Vector& u, double lambda, const Vector& row) {
  const int n = sys.dim;
  Matrix B(n + 1, n + 1);
  B.topLeftCorner(n, n) = sys.jacobian(u, lambda);
  B.topRightCorner(n, 1) = sys.dlambda(u, lambda);
  B.bottomRows(1) = row.transpose();
  return B;
}

inline Vector stack(const Vector& u, double lambda) {
  Vector x(u.size() + 1);
  x << u, lambda;
  return x;
}

}  // namespace detail

/// Unit null vector of [J, F_lambda] at (u, lambda), oriented by `orient`.
inline Vector branch_tangent(const ParamSystem& sys, const Vector& u, double lambda, const Vector& orient) {
  const int n = sys.dim;
  Matrix A(n, n + 1);
  A.leftCols(n) = sys.jacobian(u, lambda);
  A.rightCols(1) = sys.dlambda(u, lambda);
  const Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  Vector t = svd.matrixV().col(n);
  if (t.dot(orient) < 0) t = -t;
  return t.normalized();
}

/// Newton for F(u, lambda) = 0 at fixed lambda.
inline std::optional<Vector> solve_at_lambda(const ParamSystem& sys, Vector u, double lambda, double tol = 1e-10,
                                             int max_iterations = 60) {
  for (int it = 0; it < max_iterations; ++it) {
    const Vector F = sys.residual(u, lambda);
    if (F.norm() <= tol) return u;
    const Vector du = Eigen::PartialPivLU<Matrix>(sys.jacobian(u, lambda)).solve(-F);
    if (!du.allFinite()) return std::nullopt;
    u += du;
  }
  return sys.residual(u, lambda).norm() <= tol ? std::optional<Vector>(u) : std::nullopt;
}

/// Traces the branch through `start` in the direction whose tangent has a
/// positive inner product with `direction` (a vector in (u, lambda)).
inline Branch continue_branch(const ParamSystem& sys, const BranchPoint& start, const Vector& direction,
                              double origin_lambda, const ContinuationOptions& opt = {}) {
  if (!(opt.h_min < opt.h_max)) throw ValidationError("continue_branch: h_min < h_max required");
  if (sys.residual(start.u, start.lambda).norm() > 10 * opt.newton_tol)
    throw ValidationError("continue_branch: start point does not satisfy the residual tolerance");
  const int n = sys.dim;
  Branch br;
  br.origin_lambda = origin_lambda;

  BranchPoint p = start;
  p.arclength = 0.0;
  p.tangent = branch_tangent(sys, p.u, p.lambda, direction);
  p.stability = negative_eigenvalue_count(sys.jacobian(p.u, p.lambda));
  br.points.push_back(p);
  const Vector x_start = detail::stack(p.u, p.lambda);

  double h = std::clamp(opt.h_init, opt.h_min, opt.h_max);
  bool resolving = false;  // shrinking steps to resolve a trivial crossing

  auto finish = [&](Termination t, std::string why) {
    br.termination = t;
    br.diagnostics = std::move(why);
    return br;
  };

  auto nearest_eigenvalue = [&](double lam) -> std::optional<double> {
    for (double e : sys.trivial_eigenvalues)
      if (std::abs(lam - e) < opt.eig_tol) return e;
    return std::nullopt;
  };

  for (int step = 0; step < opt.max_steps; ++step) {
    const BranchPoint& cur = br.points.back();
    const Vector x = detail::stack(cur.u, cur.lambda);
    const Vector& t = cur.tangent;

    // Predictor-corrector with the arclength constraint t . (y - x) = h.
    Vector y = x + h * t;
    bool ok = false;
    int iterations = 0;
    for (; iterations < opt.max_newton; ++iterations) {
      const Vector u = y.head(n);
      const double lam = y[n];
      Vector G(n + 1);
      G.head(n) = sys.residual(u, lam);
      G[n] = t.dot(y - x) - h;
      if (!G.allFinite()) break;
      if (G.head(n).norm() <= opt.newton_tol && std::abs(G[n]) <= opt.newton_tol) {
        ok = true;
        break;
      }
      const Vector dy = Eigen::PartialPivLU<Matrix>(detail::bordered(sys, u, lam, t)).solve(-G);
      if (!dy.allFinite()) break;
      y += dy;
    }
    if (ok && (y - x).norm() > 2.0 * h) ok = false;  // jumped to another branch
    if (!ok) {
      h *= 0.5;
      if (h < opt.h_min) return finish(Termination::budget, "corrector stalled at h_min");
      continue;
    }

    const Vector u_new = y.head(n);
    const double lam_new = y[n];
    const Vector du = u_new - cur.u;

    // A trivial crossing shows up as u changing direction through the origin.
    const double closest_t = du.squaredNorm() > 0 ? std::clamp(-cur.u.dot(du) / du.squaredNorm(), 0.0, 1.0) : 0.0;
    const Vector u_star = cur.u + closest_t * du;
    const bool near_trivial = cur.u.dot(u_new) < 0 && u_star.norm() < 0.25 * std::min(cur.u.norm(), u_new.norm());
    if (near_trivial || u_new.norm() < opt.reconnect_tol) {
      if (h > opt.crossing_step && !resolving) {
        resolving = true;
        h = std::max(opt.h_min, opt.crossing_step);
        continue;
      }
      if (u_star.norm() < opt.reconnect_tol || u_new.norm() < opt.reconnect_tol) {
        const double lam_star = u_new.norm() < opt.reconnect_tol ? lam_new : cur.lambda + closest_t * (lam_new - cur.lambda);
        const auto e = nearest_eigenvalue(lam_star);
        BranchPoint q;
        q.u = u_star;
        q.lambda = lam_star;
        q.arclength = cur.arclength + closest_t * h;
        q.tangent = t;
        q.stability = negative_eigenvalue_count(sys.jacobian(q.u, q.lambda));
        br.points.push_back(q);
        if (!e) return finish(Termination::budget, "trivial crossing away from every eigenvalue");
        if (std::abs(*e - origin_lambda) < opt.eig_tol) {
          if (q.arclength > 10 * opt.h_min) return finish(Termination::loop, "returned to the bifurcation point");
        } else {
          br.reconnect_lambda = *e;
          return finish(Termination::trivial_reconnect, "reached the trivial line at another eigenvalue");
        }
      }
    }

    BranchPoint q;
    q.u = u_new;
    q.lambda = lam_new;
    q.arclength = cur.arclength + h;
    q.tangent = branch_tangent(sys, u_new, lam_new, t);
    q.stability = negative_eigenvalue_count(sys.jacobian(u_new, lam_new));
    br.points.push_back(q);

    // Closest approach of the last chord to the start point.
    const Vector chord = y - x;
    const double s = std::clamp((x_start - x).dot(chord) / chord.squaredNorm(), 0.0, 1.0);
    if (q.arclength > 10 * opt.h_min && step > 2 && (x + s * chord - x_start).norm() < opt.loop_tol)
      return finish(Termination::loop, "returned to the start point");
    if (u_new.norm() >= opt.R_max) return finish(Termination::unbounded, "norm reached R_max");
    if (lam_new < opt.lambda_min || lam_new > opt.lambda_max) return finish(Termination::budget, "lambda range exhausted");

    if (resolving && !near_trivial) resolving = false;
    if (!resolving && iterations <= 3) h = std::min(opt.h_max, h * 1.3);
  }
  return finish(Termination::budget, "step budget exhausted");
}

}  // namespace eqindex
