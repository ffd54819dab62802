#pragma once

// Run configuration shared by the CLI and the pipelines:
//   {"N": 32, "seed": 1,
//    "tolerances": {"newton_tol": 1e-11, "margin_tol": 1e-7, "tol_center": 1e-8,
//                   "tol_def": 1e-10, "eig_tol": 1e-3, "reconnect_tol": 1e-4},
//    "continuation": {"h_min": 1e-4, "h_max": 0.1, "R_max": 10, "max_steps": 2000},
//    "reduction": {"validity_radius": 0.1, "search_radius": 0.6,
//                  "block_radius": 0.05, "epsilon": 0.05}}
// Every key is optional; unknown keys are rejected.

#include <fstream>
#include <string>

#include <json.hpp>

#include "eqindex/bifurcation.hpp"
#include "eqindex/errors.hpp"

namespace eqindex {

struct RunConfig {
  int N = 32;
  std::uint32_t seed = 1;
  struct {
    double newton_tol = 1e-11;
    double margin_tol = 1e-7;
    double tol_center = 1e-8;
    double tol_def = 1e-10;
    double eig_tol = 1e-3;
    double reconnect_tol = 1e-4;
  } tolerances;
  struct {
    double h_min = 1e-4;
    double h_max = 0.1;
    double R_max = 10.0;
    int max_steps = 2000;
  } continuation;
  struct {
    double validity_radius = 0.1;
    double search_radius = 0.6;
    double block_radius = 0.05;
    double epsilon = 0.05;
  } reduction;

  void validate() const {
    const auto& t = tolerances;
    for (double v : {t.newton_tol, t.margin_tol, t.tol_center, t.tol_def, t.eig_tol, t.reconnect_tol})
      if (!(v > 0)) throw ValidationError("config: every tolerance must be positive");
    if (N < 1) throw ValidationError("config: N must be >= 1");
    if (!(continuation.h_min > 0) || !(continuation.h_min < continuation.h_max))
      throw ValidationError("config: 0 < h_min < h_max required");
    if (!(continuation.R_max > 0) || continuation.max_steps < 1)
      throw ValidationError("config: R_max and max_steps must be positive");
    const auto& r = reduction;
    for (double v : {r.validity_radius, r.search_radius, r.block_radius, r.epsilon})
      if (!(v > 0)) throw ValidationError("config: reduction radii must be positive");
  }

  BifurcationOptions bifurcation_options() const {
    BifurcationOptions o;
    o.block_radius = reduction.block_radius;
    o.validity_radius = reduction.validity_radius;
    o.search_radius = reduction.search_radius;
    o.epsilon = reduction.epsilon;
    o.tol_def = tolerances.tol_def;
    o.index.newton.tol = tolerances.newton_tol;
    o.index.seed = seed;
    o.continuation.h_min = continuation.h_min;
    o.continuation.h_max = continuation.h_max;
    o.continuation.R_max = continuation.R_max;
    o.continuation.max_steps = continuation.max_steps;
    o.continuation.eig_tol = tolerances.eig_tol;
    o.continuation.reconnect_tol = tolerances.reconnect_tol;
    return o;
  }
};

namespace detail {
inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok |= k == key;
    if (!ok) throw ValidationError("config: unknown key '" + k + "' in " + where);
  }
}
}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    detail::reject_unknown(j, {"N", "seed", "tolerances", "continuation", "reduction"}, "top level");
    c.N = j.value("N", c.N);
    c.seed = j.value("seed", c.seed);
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      detail::reject_unknown(t, {"newton_tol", "margin_tol", "tol_center", "tol_def", "eig_tol", "reconnect_tol"},
                             "tolerances");
      c.tolerances.newton_tol = t.value("newton_tol", c.tolerances.newton_tol);
      c.tolerances.margin_tol = t.value("margin_tol", c.tolerances.margin_tol);
      c.tolerances.tol_center = t.value("tol_center", c.tolerances.tol_center);
      c.tolerances.tol_def = t.value("tol_def", c.tolerances.tol_def);
      c.tolerances.eig_tol = t.value("eig_tol", c.tolerances.eig_tol);
      c.tolerances.reconnect_tol = t.value("reconnect_tol", c.tolerances.reconnect_tol);
    }
    if (j.contains("continuation")) {
      const auto& t = j.at("continuation");
      detail::reject_unknown(t, {"h_min", "h_max", "R_max", "max_steps"}, "continuation");
      c.continuation.h_min = t.value("h_min", c.continuation.h_min);
      c.continuation.h_max = t.value("h_max", c.continuation.h_max);
      c.continuation.R_max = t.value("R_max", c.continuation.R_max);
      c.continuation.max_steps = t.value("max_steps", c.continuation.max_steps);
    }
    if (j.contains("reduction")) {
      const auto& t = j.at("reduction");
      detail::reject_unknown(t, {"validity_radius", "search_radius", "block_radius", "epsilon"}, "reduction");
      c.reduction.validity_radius = t.value("validity_radius", c.reduction.validity_radius);
      c.reduction.search_radius = t.value("search_radius", c.reduction.search_radius);
      c.reduction.block_radius = t.value("block_radius", c.reduction.block_radius);
      c.reduction.epsilon = t.value("epsilon", c.reduction.epsilon);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["N"] = c.N;
  j["seed"] = c.seed;
  j["tolerances"] = {{"newton_tol", c.tolerances.newton_tol}, {"margin_tol", c.tolerances.margin_tol},
                     {"tol_center", c.tolerances.tol_center}, {"tol_def", c.tolerances.tol_def},
                     {"eig_tol", c.tolerances.eig_tol},       {"reconnect_tol", c.tolerances.reconnect_tol}};
  j["continuation"] = {{"h_min", c.continuation.h_min},
                       {"h_max", c.continuation.h_max},
                       {"R_max", c.continuation.R_max},
                       {"max_steps", c.continuation.max_steps}};
  j["reduction"] = {{"validity_radius", c.reduction.validity_radius},
                    {"search_radius", c.reduction.search_radius},
                    {"block_radius", c.reduction.block_radius},
                    {"epsilon", c.reduction.epsilon}};
  return nlohmann::json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace eqindex
