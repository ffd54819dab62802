#pragma once

// Bifurcation from (0, k^2): index of the bifurcating set from the Conley
// index of the reduced origin, one-sided branch existence, continuation of
// Galerkin branches with termination labels, and the m2 = 2 dichotomy.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eqindex/center_manifold.hpp"
#include "eqindex/conley_planar.hpp"
#include "eqindex/continuation.hpp"
#include "eqindex/equilibrium_index.hpp"
#include "eqindex/linearization.hpp"
#include "eqindex/planar_degree.hpp"

namespace eqindex {

enum class Side { left, right };

inline const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

struct BifurcationOptions {
  double block_radius = 0.05;         // reduced-origin block at lambda0
  double validity_radius = 0.1;       // largest kernel radius trusted to the quadratic manifold
  double search_radius = 0.6;         // kernel-plane radius for bifurcating zeros
  double cross_validation_offset = 0.03;
  double two_solution_offset = 0.02;
  double epsilon = 0.05;              // first one-sided sample for branch existence
  int epsilon_halvings = 5;
  double symmetry_breaking_rel = 0.05;  // eta / |lambda - lambda0| for O(2) specs
  double circle_offset = 0.05;        // lambda0 +- this for invariant-circle detection
  double circle_r_in = 0.05;
  double circle_r_out = 1.0;
  double branch_start_offset = 0.02;
  double tol_def = 1e-10;
  GalerkinIndexOptions index;
  ContinuationOptions continuation;
  CircleOptions circle;
};

inline int parity_sign(int m) { return (m % 2) ? -1 : 1; }

/// (-1)^m1 (chi - 1) on the left, (-1)^m1 (chi - (-1)^m2) on the right.
inline int index_formula(int m1, int m2, int chi, Side side) {
  return parity_sign(m1) * (side == Side::left ? chi - 1 : chi - parity_sign(m2));
}

struct OriginConley {
  int m1 = 0, m2 = 0;
  int chi = 0;
  BlockReport::Classification classification = BlockReport::Classification::not_isolating;
  std::optional<BlockReport> block;  // planar case only
  DominanceCheck dominance;
};

/// m1, m2 from the splitting at lambda0 and chi of the reduced origin at lambda0.
inline OriginConley origin_conley(const ProblemSpec& spec, int k, const BifurcationOptions& opt = {}) {
  const double lambda0 = double(k) * k;
  const SpectralSplit s0 = split_matrix(galerkin_jacobian(spec, FourierVector(spec.truncation), lambda0));
  OriginConley out;
  out.m1 = s0.m1;
  out.m2 = s0.m2;
  const ReducedField rf(spec, k);
  if (rf.dim() != out.m2) throw ConsistencyError("center dimension differs from the kernel dimension");
  if (opt.block_radius > opt.validity_radius)
    throw ValidationError("block radius " + std::to_string(opt.block_radius) + " exceeds the validity radius " +
                          std::to_string(opt.validity_radius));
  out.dominance = quadratic_dominance(rf, opt.block_radius);
  if (!out.dominance.ok)
    throw ConsistencyError("cubic remainder " + std::to_string(out.dominance.max_remainder) +
                           " reaches the quadratic part " + std::to_string(out.dominance.min_quadratic) +
                           " on the block boundary; reduce block_radius");
  if (rf.dim() == 1) {
    auto f = [&](double c) { return rf(Vector::Constant(1, c), lambda0)[0]; };
    const auto b = classify_interval(f, -opt.block_radius, opt.block_radius);
    out.chi = b.chi;
    out.classification = b.classification;
    return out;
  }
  auto f = [&](const Point2& p) -> Point2 {
    const Vector v = rf(Vector{{p.x(), p.y()}}, lambda0);
    return {v[0], v[1]};
  };
  BlockReport b = classify_block_auto(f, Point2::Zero(), opt.block_radius);
  if (b.classification == BlockReport::Classification::not_isolating)
    throw Error("reduced origin: no isolating circle found down to radius " + std::to_string(b.radius));
  out.chi = b.chi;
  out.classification = b.classification;
  out.block = std::move(b);
  return out;
}

struct ShellIndex {
  double lambda = 0.0;
  int index = 0;
  double r_in = 0.0, r_out = 0.0;
  int zeros = 0;
  double symmetry_breaking = 0.0;
};

/// Full-space index of the bifurcating set at lambda: zero count over a
/// shell around the nontrivial lifted reduced zeros (an O(2)-symmetric spec
/// gets the symmetry-breaking term so that its circle splits into isolated
/// zeros).
inline ShellIndex shell_index(const ProblemSpec& spec, int k, double lambda, const BifurcationOptions& opt = {}) {
  const ReducedField rf(spec, k);
  const double lambda0 = double(k) * k;
  ShellIndex out;
  out.lambda = lambda;
  out.symmetry_breaking = spec.is_o2_symmetric() && k > 0 ? opt.symmetry_breaking_rel * std::abs(lambda - lambda0) : 0.0;
  std::vector<double> radii;
  for (const auto& c : reduced_zeros(rf, lambda, opt.search_radius, out.symmetry_breaking))
    if (c.norm() > 1e-9) radii.push_back(rf.manifold().lift(c).norm());
  if (radii.empty()) {
    out.r_in = 0.02 * opt.search_radius;
    out.r_out = opt.search_radius;
  } else {
    out.r_in = 0.5 * *std::min_element(radii.begin(), radii.end());
    out.r_out = 2.0 * *std::max_element(radii.begin(), radii.end());
  }
  GalerkinIndexOptions iopt = opt.index;
  iopt.kernel_k = k;
  iopt.symmetry_breaking = out.symmetry_breaking;
  iopt.reduced_radius = opt.search_radius;
  const IndexReport rep = galerkin_equilibrium_index(spec, lambda, ShellRegion::shell(out.r_in, out.r_out), iopt);
  out.index = rep.index;
  out.zeros = int(rep.witnesses.size());
  return out;
}

struct SetIndexResult {
  int formula = 0;
  ShellIndex shell;
  OriginConley origin;
};

/// Formula value of Ind(K) on one side, cross-validated against the shell
/// zero count at lambda0 -+ cross_validation_offset. Mismatch throws.
inline SetIndexResult bifurcating_set_index(const ProblemSpec& spec, int k, Side side, const BifurcationOptions& opt = {}) {
  const double lambda0 = double(k) * k;
  const CrossingResult cr = crossing_check(spec, lambda0, opt.cross_validation_offset);
  if (!cr.satisfied) throw ConsistencyError("crossing condition fails at lambda0 = " + std::to_string(lambda0));
  SetIndexResult out;
  out.origin = origin_conley(spec, k, opt);
  out.formula = index_formula(out.origin.m1, out.origin.m2, out.origin.chi, side);
  const double lambda = lambda0 + (side == Side::left ? -1.0 : 1.0) * opt.cross_validation_offset;
  out.shell = shell_index(spec, k, lambda, opt);
  if (out.shell.index != out.formula)
    throw ConsistencyError("index formula gives " + std::to_string(out.formula) + " but the shell zero count at lambda = " +
                           std::to_string(lambda) + " gives " + std::to_string(out.shell.index));
  return out;
}

struct Confirmation {
  Side side = Side::right;
  double epsilon = 0.0;
  bool found = false;
  double norm = 0.0;
};

/// Distinct nontrivial Galerkin equilibria reachable from lifted reduced
/// zeros and kernel rays at lambda, within `radius` of the origin.
inline std::vector<Vector> nontrivial_equilibria(const ProblemSpec& spec, int k, double lambda, double radius,
                                                 const BifurcationOptions& opt = {}) {
  const ReducedField rf(spec, k);
  GalerkinIndexOptions iopt = opt.index;
  std::vector<Vector> seeds;
  for (const auto& c : reduced_zeros(rf, lambda, radius)) seeds.push_back(rf.manifold().lift(c).coeffs());
  // Rays through the kernel at the four axis angles (two for a simple kernel).
  const int d = rf.dim();
  for (int a = 0; a < 2 * d; ++a) {
    Vector dir = Vector::Zero(d);
    dir[a / 2] = (a % 2) ? -1.0 : 1.0;
    auto g = [&](double s) { return rf(Vector(s * dir), lambda).dot(dir); };
    const int n = 200;
    double prev = g(radius / n);
    for (int i = 2; i <= n; ++i) {
      const double s = radius * i / n, gs = g(s);
      if ((gs < 0) != (prev < 0)) seeds.push_back(rf.manifold().lift(Vector(s * dir)).coeffs());
      prev = gs;
    }
  }
  const EquationSystem sys = galerkin_system(spec, lambda);
  std::vector<Vector> out;
  for (const auto& z : multistart_zeros(sys, seeds, iopt.newton, 4.0 * radius + 1.0, iopt.threads)) {
    if (z.x.norm() <= 1e-8 || z.x.norm() > radius * 2.0) continue;
    out.push_back(z.x);
  }
  return out;
}

struct LocalBranchResult {
  bool right = false;
  bool left = false;
  int chi = 0;
  int m2 = 0;
  std::vector<Confirmation> confirmations;
};

/// Flags right = chi != (-1)^m2 and left = chi != 1, each confirmed by a
/// nontrivial equilibrium at lambda0 +- eps on a halving schedule.
inline LocalBranchResult local_branch_existence(const ProblemSpec& spec, int k, const BifurcationOptions& opt = {}) {
  const OriginConley oc = origin_conley(spec, k, opt);
  LocalBranchResult out;
  out.chi = oc.chi;
  out.m2 = oc.m2;
  out.right = oc.chi != parity_sign(oc.m2);
  out.left = oc.chi != 1;
  const double lambda0 = double(k) * k;
  for (Side side : {Side::left, Side::right}) {
    if (!(side == Side::left ? out.left : out.right)) continue;
    double eps = opt.epsilon;
    bool ok = false;
    for (int h = 0; h <= opt.epsilon_halvings && !ok; ++h, eps *= 0.5) {
      const double lambda = lambda0 + (side == Side::left ? -eps : eps);
      const auto zs = nontrivial_equilibria(spec, k, lambda, opt.search_radius, opt);
      Confirmation c{side, eps, !zs.empty(), 0.0};
      if (c.found) {
        c.norm = zs.front().norm();
        ok = true;
      }
      out.confirmations.push_back(c);
    }
    if (!ok)
      throw ConfirmationFailure(std::string("no nontrivial equilibrium found on the ") + to_string(side) +
                                " side although chi = " + std::to_string(oc.chi) + " predicts one");
  }
  return out;
}

/// Galerkin system restricted to a coordinate subspace of modes.
struct GalerkinBranchSystem {
  ParamSystem sys;
  std::vector<int> modes;  // indices into the full coefficient vector
  int truncation = 0;

  Vector embed(const Vector& x) const {
    Vector u = Vector::Zero(mode_count(truncation));
    for (std::size_t i = 0; i < modes.size(); ++i) u[modes[i]] = x[Eigen::Index(i)];
    return u;
  }
  Vector restrict_to(const Vector& u) const {
    Vector x(Eigen::Index(modes.size()));
    for (std::size_t i = 0; i < modes.size(); ++i) x[Eigen::Index(i)] = u[modes[i]];
    return x;
  }
};

/// Full system, or the invariant cosine subspace for O(2)-symmetric specs
/// (which removes the translation degeneracy of their circles of zeros).
inline GalerkinBranchSystem galerkin_branch_system(const ProblemSpec& spec) {
  GalerkinBranchSystem g;
  g.truncation = spec.truncation;
  const bool even = spec.is_o2_symmetric();
  for (int i = 0; i < spec.dimension(); ++i)
    if (!even || TrigMode::from_index(i).parity != Parity::sine) g.modes.push_back(i);
  ProblemSpec s = spec;
  s.h_terms = detail::sorted_terms(spec.h_terms);
  const auto modes = g.modes;
  const int N = spec.truncation;
  auto embed = [modes, N](const Vector& x) {
    Vector u = Vector::Zero(mode_count(N));
    for (std::size_t i = 0; i < modes.size(); ++i) u[modes[i]] = x[Eigen::Index(i)];
    return u;
  };
  g.sys.dim = int(modes.size());
  g.sys.residual = [s, modes, N, embed](const Vector& x, double lambda) -> Vector {
    const Vector r = galerkin_residual(s, FourierVector(N, embed(x)), lambda).coeffs();
    Vector out(Eigen::Index(modes.size()));
    for (std::size_t i = 0; i < modes.size(); ++i) out[Eigen::Index(i)] = r[modes[i]];
    return out;
  };
  g.sys.jacobian = [s, modes, N, embed](const Vector& x, double lambda) -> Matrix {
    const Matrix J = galerkin_jacobian(s, FourierVector(N, embed(x)), lambda);
    const Eigen::Index m = Eigen::Index(modes.size());
    Matrix out(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) out(i, j) = J(modes[i], modes[j]);
    return out;
  };
  g.sys.dlambda = [](const Vector& x, double) -> Vector { return -x; };
  for (int n = 0; n <= N; ++n) g.sys.trivial_eigenvalues.push_back(double(n) * n);
  return g;
}

/// Branch starts at lambda0 -+ offset (nontrivial equilibria seeded from the
/// kernel) continued away from the origin. Points are returned in full
/// coefficient coordinates.
inline std::vector<Branch> continue_galerkin_branches(const ProblemSpec& spec, int k, const BifurcationOptions& opt = {}) {
  const double lambda0 = double(k) * k;
  const GalerkinBranchSystem g = galerkin_branch_system(spec);
  std::vector<Vector> starts;
  std::vector<double> start_lambda;
  for (Side side : {Side::left, Side::right}) {
    const double lambda = lambda0 + (side == Side::left ? -1.0 : 1.0) * opt.branch_start_offset;
    std::vector<Vector> seeds;
    if (spec.is_o2_symmetric()) {
      // Circles of zeros: seed the cosine subspace directly along the kernel rays.
      const ReducedField rf(spec, k);
      const int d = rf.dim();
      for (int a = 0; a < 2 * d; ++a) {
        Vector dir = Vector::Zero(d);
        dir[a / 2] = (a % 2) ? -1.0 : 1.0;
        auto gfun = [&](double s) { return rf(Vector(s * dir), lambda).dot(dir); };
        const int n = 200;
        double prev = gfun(opt.search_radius / n);
        for (int i = 2; i <= n; ++i) {
          const double s = opt.search_radius * i / n, gs = gfun(s);
          if ((gs < 0) != (prev < 0)) seeds.push_back(rf.manifold().lift(Vector(s * dir)).coeffs());
          prev = gs;
        }
      }
    } else {
      seeds = nontrivial_equilibria(spec, k, lambda, opt.search_radius, opt);
    }
    for (const auto& sd : seeds) {
      const Vector x0 = g.restrict_to(sd);
      if (x0.norm() <= 1e-8) continue;
      const auto x = solve_at_lambda(g.sys, x0, lambda, opt.continuation.newton_tol);
      if (!x || x->norm() <= 1e-8) continue;
      bool dup = false;
      for (std::size_t i = 0; i < starts.size(); ++i)
        if (start_lambda[i] == lambda && (starts[i] - *x).norm() < 1e-6) dup = true;
      if (!dup) {
        starts.push_back(*x);
        start_lambda.push_back(lambda);
      }
    }
  }
  std::vector<Branch> out = parallel_map(
      int(starts.size()),
      [&](int i) {
        BranchPoint p;
        p.u = starts[i];
        p.lambda = start_lambda[i];
        Vector dir(p.u.size() + 1);
        dir << p.u, 0.0;
        Branch b = continue_branch(g.sys, p, dir, lambda0, opt.continuation);
        for (auto& q : b.points) {
          Vector t(mode_count(g.truncation) + 1);
          t << g.embed(q.tangent.head(q.tangent.size() - 1)), q.tangent[q.tangent.size() - 1];
          q.u = g.embed(q.u);
          q.tangent = t;
        }
        return b;
      },
      opt.index.threads);
  return out;
}

enum class TrichotomyLabel { case1_unbounded, case2_reconnect, case3_loop, two_solution, inconclusive_budget };

inline const char* to_string(TrichotomyLabel l) {
  switch (l) {
    case TrichotomyLabel::case1_unbounded: return "case1_unbounded";
    case TrichotomyLabel::case2_reconnect: return "case2_reconnect";
    case TrichotomyLabel::case3_loop: return "case3_loop";
    case TrichotomyLabel::two_solution: return "two_solution";
    case TrichotomyLabel::inconclusive_budget: return "inconclusive_budget";
  }
  return "";
}

/// Termination labels of the branches mapped to the alternatives: an
/// unbounded branch, a reconnection at another eigenvalue, a loop back to
/// the bifurcation point, or (when no branch settles it) the two-solution
/// neighborhood. A loop must come with the two-solution property; a
/// violation throws.
inline TrichotomyLabel classify_trichotomy(const std::vector<Branch>& branches, std::optional<bool> two_solution = {}) {
  bool unbounded = false, reconnect = false, loop = false;
  for (const auto& b : branches) {
    unbounded |= b.termination == Termination::unbounded;
    reconnect |= b.termination == Termination::trivial_reconnect;
    loop |= b.termination == Termination::loop;
  }
  if (unbounded) return TrichotomyLabel::case1_unbounded;
  if (reconnect) return TrichotomyLabel::case2_reconnect;
  if (loop) {
    if (two_solution && !*two_solution)
      throw ConsistencyError("loop branch without two nontrivial equilibria on both sides");
    return TrichotomyLabel::case3_loop;
  }
  if (two_solution && *two_solution) return TrichotomyLabel::two_solution;
  return TrichotomyLabel::inconclusive_budget;
}

/// Counts distinct nontrivial zeros of a parameter system from the given
/// starts; a helper for the two-solution property.
inline int count_nontrivial_zeros(const ParamSystem& sys, double lambda, const std::vector<Vector>& starts,
                                  double radius, double dedup = 1e-6) {
  std::vector<Vector> found;
  for (const auto& s : starts) {
    const auto z = solve_at_lambda(sys, s, lambda, 1e-11);
    if (!z || z->norm() <= 1e-8 || z->norm() > radius) continue;
    bool dup = false;
    for (const auto& f : found)
      if ((f - *z).norm() < dedup) dup = true;
    if (!dup) found.push_back(*z);
  }
  return int(found.size());
}

struct BifurcationReport {
  enum class Classification { attractor_repeller_bifurcation, global_static_bifurcation, two_solution_neighborhood };
  double lambda0 = 0.0;
  int k = 0;
  int truncation = 0;
  int m1 = 0, m2 = 0;
  int chi = 0;
  BlockReport::Classification origin = BlockReport::Classification::neither;
  int K_index_left = 0, K_index_right = 0;
  ShellIndex shell_left, shell_right;
  bool local_left = false, local_right = false;
  std::vector<Confirmation> confirmations;
  std::optional<double> gamma1, gamma2;
  Classification classification = Classification::global_static_bifurcation;
  std::optional<InvariantCircle> circle;
  std::optional<Side> circle_side;
  int solutions_left = 0, solutions_right = 0;
};

inline const char* to_string(BifurcationReport::Classification c) {
  switch (c) {
    case BifurcationReport::Classification::attractor_repeller_bifurcation: return "attractor_repeller_bifurcation";
    case BifurcationReport::Classification::global_static_bifurcation: return "global_static_bifurcation";
    case BifurcationReport::Classification::two_solution_neighborhood: return "two_solution_neighborhood";
  }
  return "";
}

/// The m2 = 2 alternative: an attracting or repelling reduced origin gives an
/// invariant circle on the side where it has become a repeller (resp.
/// attractor); otherwise chi != 1 and the static machinery applies.
inline BifurcationReport m2_dichotomy(const ProblemSpec& spec, int k, const BifurcationOptions& opt = {}) {
  BifurcationReport rep;
  rep.k = k;
  rep.lambda0 = double(k) * k;
  rep.truncation = spec.truncation;
  const auto left = bifurcating_set_index(spec, k, Side::left, opt);
  const auto right = bifurcating_set_index(spec, k, Side::right, opt);
  rep.m1 = left.origin.m1;
  rep.m2 = left.origin.m2;
  if (rep.m2 != 2) throw ValidationError("m2_dichotomy requires a two-dimensional center space");
  rep.chi = left.origin.chi;
  rep.origin = left.origin.classification;
  rep.K_index_left = left.formula;
  rep.K_index_right = right.formula;
  rep.shell_left = left.shell;
  rep.shell_right = right.shell;

  const ReducedField rf(spec, k);
  rep.gamma1 = bilinear_definiteness(rf, 1, opt.tol_def).gamma;
  rep.gamma2 = bilinear_definiteness(rf, 2, opt.tol_def).gamma;

  if (rep.origin == BlockReport::Classification::attractor || rep.origin == BlockReport::Classification::repeller) {
    rep.classification = BifurcationReport::Classification::attractor_repeller_bifurcation;
    const Side side = rep.origin == BlockReport::Classification::attractor ? Side::right : Side::left;
    const double lambda = rep.lambda0 + (side == Side::right ? 1.0 : -1.0) * opt.circle_offset;
    auto f = [&](const Point2& p) -> Point2 {
      const Vector v = rf(Vector{{p.x(), p.y()}}, lambda);
      // A repelling origin is detected as an attracting one in reversed time.
      return side == Side::right ? Point2(v[0], v[1]) : Point2(-v[0], -v[1]);
    };
    rep.circle = detect_invariant_circle(f, Point2::Zero(), opt.circle_r_in, opt.circle_r_out, opt.circle);
    rep.circle_side = side;
    return rep;
  }

  const auto lb = local_branch_existence(spec, k, opt);
  rep.local_left = lb.left;
  rep.local_right = lb.right;
  rep.confirmations = lb.confirmations;
  rep.solutions_left =
      int(nontrivial_equilibria(spec, k, rep.lambda0 - opt.two_solution_offset, opt.search_radius, opt).size());
  rep.solutions_right =
      int(nontrivial_equilibria(spec, k, rep.lambda0 + opt.two_solution_offset, opt.search_radius, opt).size());
  rep.classification = (rep.solutions_left >= 2 && rep.solutions_right >= 2)
                           ? BifurcationReport::Classification::two_solution_neighborhood
                           : BifurcationReport::Classification::global_static_bifurcation;
  return rep;
}

}  // namespace eqindex
