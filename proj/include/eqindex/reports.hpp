#pragma once

// JSON and CSV forms of the result types. Every JSON report carries
// "schema": 1 plus the configuration and problem it was computed from.

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqindex/bifurcation.hpp"
#include "eqindex/center_manifold.hpp"
#include "eqindex/config.hpp"
#include "eqindex/conley_planar.hpp"
#include "eqindex/linearization.hpp"
#include "eqindex/planar_degree.hpp"
#include "eqindex/spec_io.hpp"

namespace eqindex {

using json = nlohmann::json;

inline json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json report_envelope(const std::string& command, const RunConfig& cfg, const ProblemSpec& spec) {
  json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  j["spec"] = spec_to_json(spec);
  return j;
}

inline json to_json(const SpectralSplit& s) {
  json j;
  j["eigenvalues"] = vector_json(s.eigenvalues);
  j["delta"] = s.delta;
  j["m1"] = s.m1;
  j["m2"] = s.m2;
  j["sigma1"] = s.sigma1;
  j["sigma2"] = s.sigma2;
  j["sigma3"] = s.sigma3;
  return j;
}

/// Nonzero coefficients as [[mode label, value], ...].
inline json coefficient_table(const FourierVector& u, double zero_tol = 0.0) {
  json t = json::array();
  for (int i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) <= zero_tol) continue;
    const TrigMode m = TrigMode::from_index(i);
    const std::string label = m.parity == Parity::constant ? "const"
                              : (m.parity == Parity::sine ? "sin" : "cos") + std::to_string(m.n);
    t.push_back({label, u[i]});
  }
  return t;
}

inline json to_json(const DominanceCheck& d) {
  return {{"radius", d.radius}, {"min_quadratic", d.min_quadratic}, {"max_remainder", d.max_remainder},
          {"kappa", d.kappa}, {"applicable", d.applicable}, {"ok", d.ok}};
}

inline json to_json(const IndexReport& r) {
  json j;
  j["index"] = r.index;
  j["method"] = to_string(r.method);
  j["margin"] = r.margin;
  json w = json::array();
  for (const auto& x : r.witnesses) {
    const double norm = std::sqrt(std::inner_product(x.location.begin(), x.location.end(), x.location.begin(), 0.0));
    w.push_back({{"location", x.location}, {"norm", norm}, {"sign", x.sign}, {"det", x.det}});
  }
  j["witnesses"] = w;
  return j;
}

inline json to_json(const BlockReport& b) {
  json j;
  j["center"] = {b.center.x(), b.center.y()};
  j["radius"] = b.radius;
  j["exit_arcs"] = b.exit_arcs;
  j["entry_arcs"] = b.entry_arcs;
  j["arc_endpoints"] = b.arc_endpoints;
  j["tangencies"] = b.tangencies;
  j["bounce_off_points"] = b.bounce_off_points;
  j["chi"] = b.chi;
  j["classification"] = to_string(b.classification);
  j["shrinks"] = b.shrinks;
  return j;
}

inline std::string flux_csv(const BlockReport& b) {
  std::ostringstream os;
  os << "theta,flux\n";
  char buf[64];
  for (const auto& [t, s] : b.flux_samples) {
    std::snprintf(buf, sizeof buf, "%.12e,%.12e\n", t, s);
    os << buf;
  }
  return os.str();
}

inline json to_json(const InvariantCircle& c) {
  json j;
  j["found"] = c.found;
  j["kind"] = to_string(c.kind);
  j["mean_radius"] = c.mean_radius;
  j["min_radius"] = c.min_radius;
  j["max_radius"] = c.max_radius;
  j["witness_count"] = c.witnesses.size();
  if (!c.diagnostics.empty()) j["diagnostics"] = c.diagnostics;
  return j;
}

inline json to_json(const ShellIndex& s) {
  return {{"lambda", s.lambda}, {"index", s.index}, {"r_in", s.r_in}, {"r_out", s.r_out},
          {"zeros", s.zeros},   {"symmetry_breaking", s.symmetry_breaking}};
}

inline json to_json(const BifurcationReport& r) {
  json j;
  j["lambda0"] = r.lambda0;
  j["k"] = r.k;
  j["truncation"] = r.truncation;
  j["m1"] = r.m1;
  j["m2"] = r.m2;
  j["chi"] = r.chi;
  j["origin"] = to_string(r.origin);
  j["K_index_left"] = r.K_index_left;
  j["K_index_right"] = r.K_index_right;
  j["shell_left"] = to_json(r.shell_left);
  j["shell_right"] = to_json(r.shell_right);
  j["local_branch"] = {{"left", r.local_left}, {"right", r.local_right}};
  json c = json::array();
  for (const auto& x : r.confirmations)
    c.push_back({{"side", to_string(x.side)}, {"epsilon", x.epsilon}, {"found", x.found}, {"norm", x.norm}});
  j["confirmations"] = c;
  if (r.gamma1) j["gamma1"] = *r.gamma1;
  if (r.gamma2) j["gamma2"] = *r.gamma2;
  j["classification"] = to_string(r.classification);
  if (r.circle) {
    j["invariant_circle"] = to_json(*r.circle);
    j["invariant_circle"]["side"] = to_string(*r.circle_side);
  }
  j["nontrivial_solutions"] = {{"left", r.solutions_left}, {"right", r.solutions_right}};
  return j;
}

inline json branch_summary(const Branch& b) {
  json j;
  j["termination"] = to_string(b.termination);
  j["points"] = b.points.size();
  j["origin_lambda"] = b.origin_lambda;
  if (b.termination == Termination::trivial_reconnect) j["reconnect_lambda"] = b.reconnect_lambda;
  if (!b.points.empty()) {
    j["start_lambda"] = b.points.front().lambda;
    j["end_lambda"] = b.points.back().lambda;
    j["end_norm"] = b.points.back().u.norm();
    j["arclength"] = b.points.back().arclength;
  }
  j["diagnostics"] = b.diagnostics;
  return j;
}

inline constexpr int branch_csv_coefficients = 5;

/// Columns: arclength, lambda, norm, coef0..coef4 (leading coefficients in
/// the basis order), stability (negative Jacobian eigenvalues).
inline std::string branch_csv(const Branch& b) {
  std::ostringstream os;
  os << "arclength,lambda,norm";
  for (int i = 0; i < branch_csv_coefficients; ++i) os << ",coef" << i;
  os << ",stability\n";
  char buf[64];
  for (const auto& p : b.points) {
    std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e", p.arclength, p.lambda, p.u.norm());
    os << buf;
    for (int i = 0; i < branch_csv_coefficients; ++i) {
      std::snprintf(buf, sizeof buf, ",%.12e", i < p.u.size() ? p.u[i] : 0.0);
      os << buf;
    }
    os << "," << p.stability << "\n";
  }
  return os.str();
}

}  // namespace eqindex
