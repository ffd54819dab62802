#pragma once

// JSON form of a ProblemSpec:
//   {"N": 32,
//    "a": {"const": 0.0, "sin": [1.0], "cos": []},
//    "h": [{"p": 3, "c": {"const": -1.0}}]}
// Coefficient objects hold plain trigonometric amplitudes,
//   f(x) = const + sum_n sin[n-1] sin(nx) + cos[n-1] cos(nx),
// not coefficients against the normalized basis. Missing arrays mean zero.

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "eqindex/spectral_core.hpp"

namespace eqindex {

inline FourierVector trig_function_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("coefficient function must be a JSON object");
  const double sq2pi = std::sqrt(2.0 * std::numbers::pi), sqpi = std::sqrt(std::numbers::pi);
  std::vector<double> sn, cs;
  if (j.contains("sin")) sn = j.at("sin").get<std::vector<double>>();
  if (j.contains("cos")) cs = j.at("cos").get<std::vector<double>>();
  for (const auto& [key, _] : j.items())
    if (key != "const" && key != "sin" && key != "cos")
      throw ValidationError("unknown key '" + key + "' in coefficient function");
  const int n = int(std::max(sn.size(), cs.size()));
  FourierVector f(n);
  if (j.contains("const")) f[0] = j.at("const").get<double>() * sq2pi;
  for (int i = 0; i < int(sn.size()); ++i) f[2 * i + 1] = sn[i] * sqpi;
  for (int i = 0; i < int(cs.size()); ++i) f[2 * i + 2] = cs[i] * sqpi;
  return f;
}

inline nlohmann::json trig_function_to_json(const FourierVector& f) {
  const double sq2pi = std::sqrt(2.0 * std::numbers::pi), sqpi = std::sqrt(std::numbers::pi);
  nlohmann::json j;
  j["const"] = f[0] / sq2pi;
  std::vector<double> sn, cs;
  for (int n = 1; n <= f.truncation(); ++n) {
    sn.push_back(f[2 * n - 1] / sqpi);
    cs.push_back(f[2 * n] / sqpi);
  }
  j["sin"] = sn;
  j["cos"] = cs;
  return j;
}

inline ProblemSpec spec_from_json(const nlohmann::json& j, int default_truncation = 32) {
  ProblemSpec spec;
  if (!j.is_object()) throw ValidationError("problem spec must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "N" && key != "a" && key != "h") throw ValidationError("unknown key '" + key + "' in problem spec");
  try {
    spec.truncation = j.value("N", default_truncation);
    spec.a = j.contains("a") ? trig_function_from_json(j.at("a")) : FourierVector(0);
    if (j.contains("h")) {
      for (const auto& t : j.at("h")) {
        NonlinearTerm term;
        term.power = t.at("p").get<int>();
        term.coefficient = trig_function_from_json(t.at("c"));
        spec.h_terms.push_back(std::move(term));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed problem spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline nlohmann::json spec_to_json(const ProblemSpec& spec) {
  nlohmann::json j;
  j["N"] = spec.truncation;
  j["a"] = trig_function_to_json(spec.a);
  j["h"] = nlohmann::json::array();
  for (const auto& t : spec.h_terms) j["h"].push_back({{"p", t.power}, {"c", trig_function_to_json(t.coefficient)}});
  return j;
}

inline ProblemSpec load_spec(const std::string& path, int default_truncation = 32) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spec file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("spec file " + path + " is not valid JSON: " + e.what());
  }
  return spec_from_json(j, default_truncation);
}

}  // namespace eqindex
