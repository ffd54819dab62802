// eqindex command line driver.
//
// Exit codes: 0 success, 1 invalid input, 2 a numerical or consistency
// failure (including a failed row of `verify`).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqindex/bifurcation.hpp"
#include "eqindex/config.hpp"
#include "eqindex/reports.hpp"
#include "eqindex/spec_io.hpp"

using namespace eqindex;

namespace {

struct Common {
  std::string spec_path;
  std::string config_path;
  std::string out_path;
  std::optional<std::uint32_t> seed;
};

struct Loaded {
  RunConfig cfg;
  ProblemSpec spec;
};

Loaded load(const Common& c) {
  Loaded l;
  if (!c.config_path.empty()) l.cfg = load_config(c.config_path);
  if (c.seed) l.cfg.seed = *c.seed;
  l.spec = load_spec(c.spec_path, l.cfg.N);
  l.cfg.N = l.spec.truncation;
  return l;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

void emit(const Common& c, const json& j) { write_text(c.out_path, j.dump(2) + "\n"); }

GalerkinIndexOptions index_options(const RunConfig& cfg) {
  GalerkinIndexOptions o;
  o.newton.tol = cfg.tolerances.newton_tol;
  o.seed = cfg.seed;
  return o;
}

int nearest_k(double lambda) { return int(std::lround(std::sqrt(std::max(0.0, lambda)))); }

double eta_for(const ProblemSpec& spec, int k, double lambda) {
  return spec.is_o2_symmetric() && k > 0 ? 0.05 * std::abs(lambda - double(k) * k) : 0.0;
}

json run_spectrum(const Loaded& l, double lambda) {
  const SpectralSplit s =
      split_matrix(galerkin_jacobian(l.spec, FourierVector(l.spec.truncation), lambda), std::nullopt,
                   l.cfg.tolerances.tol_center);
  json r = to_json(s);
  r["lambda"] = lambda;
  return r;
}

json run_reduce(const Loaded& l, int k) {
  const QuadraticManifold mf = quadratic_coefficients(l.spec, k);
  const ReducedField rf(l.spec, mf);
  json r;
  r["k"] = k;
  r["lambda0"] = mf.lambda0();
  r["dim"] = mf.dim();
  json v = json::array();
  for (int i = 0; i < mf.dim(); ++i)
    for (int j = i; j < mf.dim(); ++j)
      v.push_back({{"i", i + 1}, {"j", j + 1}, {"w", coefficient_table(mf.w(i, j), 1e-14)},
                   {"v", coefficient_table(mf.v(i, j), 1e-14)}});
  r["manifold"] = v;
  json b = json::array();
  for (int i = 0; i < mf.dim(); ++i)
    for (int j = 0; j < mf.dim(); ++j)
      for (int m = 0; m < mf.dim(); ++m) b.push_back({{"i", i + 1}, {"j", j + 1}, {"l", m + 1}, {"b", rf.b(i, j, m)}});
  r["reduced_quadratic"] = b;
  std::vector<double> radii;
  for (double rad = 0.1; rad > 0.002; rad *= 0.5) radii.push_back(rad);
  try {
    const OrderCheckResult oc = residual_order_check(l.spec, mf, radii);
    r["order_check"] = {{"slope", std::isfinite(oc.slope) ? json(oc.slope) : json("inf")},
                        {"identically_zero", oc.identically_zero}};
    json t = json::array();
    for (const auto& row : oc.table) t.push_back({{"radius", row.radius}, {"residual", row.residual}});
    r["order_check"]["table"] = t;
  } catch (const OrderCheckFailure& e) {
    r["order_check"] = {{"slope", e.slope()}, {"error", e.what()}};
  }
  for (double rad : {l.cfg.reduction.block_radius, l.cfg.reduction.validity_radius})
    r["quadratic_dominance"].push_back(to_json(quadratic_dominance(rf, rad)));
  if (mf.dim() == 2) {
    for (int i : {1, 2}) {
      const Definiteness d = bilinear_definiteness(rf, i, l.cfg.tolerances.tol_def);
      r["definiteness"].push_back({{"component", i}, {"definite", d.definite}, {"gamma", d.gamma}});
    }
  }
  return r;
}

json run_index(const Loaded& l, double lambda, const std::string& method, double radius, std::optional<int> k_opt) {
  const int k = k_opt.value_or(nearest_k(lambda));
  GalerkinIndexOptions iopt = index_options(l.cfg);
  iopt.kernel_k = k;
  iopt.symmetry_breaking = eta_for(l.spec, k, lambda);
  json r;
  r["lambda"] = lambda;
  r["k"] = k;
  r["radius"] = radius;
  r["symmetry_breaking"] = iopt.symmetry_breaking;
  if (method == "count" || method == "both") {
    const IndexReport rep = galerkin_equilibrium_index(l.spec, lambda, ShellRegion::ball(radius), iopt);
    r["count"] = to_json(rep);
  }
  if (method == "winding" || method == "both") {
    ReductionOptions ro;
    ro.index = iopt;
    ro.search_radius = radius;
    const ReductionIdentityResult red = reduction_identity_check(l.spec, k, lambda, ro);
    r["winding"] = {{"reduced_degree", red.reduced_degree},
                    {"index", red.rhs},
                    {"full_index", red.lhs},
                    {"m1", red.m1},
                    {"m2", red.m2},
                    {"r_in", red.r_in},
                    {"r_out", red.r_out},
                    {"shell", red.shell}};
    if (!red.equal)
      throw ConsistencyError("reduced winding index " + std::to_string(red.rhs) + " differs from the full count " +
                             std::to_string(red.lhs));
  }
  return r;
}

json run_conley(const Loaded& l, int k, std::optional<double> lambda_opt, double radius, const std::string& flux_path) {
  const ReducedField rf(l.spec, k);
  const double lambda = lambda_opt.value_or(double(k) * k);
  json r;
  r["k"] = k;
  r["lambda"] = lambda;
  if (rf.dim() == 1) {
    auto f = [&](double c) { return rf(Vector::Constant(1, c), lambda)[0]; };
    const IntervalBlock b = classify_interval(f, -radius, radius);
    r["block"] = {{"interval", {-radius, radius}}, {"chi", b.chi}, {"classification", to_string(b.classification)}};
    return r;
  }
  if (rf.dim() != 2) throw ValidationError("conley: reduced dimension must be 1 or 2");
  auto f = [&](const Point2& p) -> Point2 {
    const Vector v = rf(Vector{{p.x(), p.y()}}, lambda);
    return {v[0], v[1]};
  };
  const BlockReport b = classify_block_auto(f, Point2::Zero(), radius);
  r["block"] = to_json(b);
  if (!flux_path.empty()) write_text(flux_path, flux_csv(b));
  return r;
}

json run_branch(const Loaded& l, int k, const std::string& csv_prefix) {
  const BifurcationOptions opt = l.cfg.bifurcation_options();
  const auto branches = continue_galerkin_branches(l.spec, k, opt);
  json r;
  r["k"] = k;
  json arr = json::array();
  for (std::size_t i = 0; i < branches.size(); ++i) {
    json s = branch_summary(branches[i]);
    if (!csv_prefix.empty()) {
      const std::string path = csv_prefix + "_" + std::to_string(i) + ".csv";
      write_text(path, branch_csv(branches[i]));
      s["csv"] = path;
    }
    arr.push_back(s);
  }
  r["branches"] = arr;
  r["label"] = to_string(classify_trichotomy(branches));
  return r;
}

json run_bifurcate(const Loaded& l, int k) {
  const BifurcationOptions opt = l.cfg.bifurcation_options();
  const OriginConley oc = origin_conley(l.spec, k, opt);
  if (oc.m2 == 2) return to_json(m2_dichotomy(l.spec, k, opt));
  json r;
  r["lambda0"] = double(k) * k;
  r["k"] = k;
  r["m1"] = oc.m1;
  r["m2"] = oc.m2;
  r["chi"] = oc.chi;
  r["origin"] = to_string(oc.classification);
  for (Side side : {Side::left, Side::right}) {
    const SetIndexResult s = bifurcating_set_index(l.spec, k, side, opt);
    r[std::string("K_index_") + to_string(side)] = s.formula;
    r[std::string("shell_") + to_string(side)] = to_json(s.shell);
  }
  const LocalBranchResult lb = local_branch_existence(l.spec, k, opt);
  r["local_branch"] = {{"left", lb.left}, {"right", lb.right}};
  json c = json::array();
  for (const auto& x : lb.confirmations)
    c.push_back({{"side", to_string(x.side)}, {"epsilon", x.epsilon}, {"found", x.found}, {"norm", x.norm}});
  r["confirmations"] = c;
  return r;
}

struct VerifyRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

template <class Fn>
VerifyRow verify_row(std::string name, Fn&& fn) {
  VerifyRow row;
  row.name = std::move(name);
  try {
    row.detail = fn(row.pass);
  } catch (const std::exception& e) {
    row.pass = false;
    row.detail = e.what();
  }
  return row;
}

std::vector<VerifyRow> run_verify(const Loaded& l, int k) {
  const BifurcationOptions opt = l.cfg.bifurcation_options();
  const double lambda0 = double(k) * k;
  std::vector<VerifyRow> rows;
  rows.push_back(verify_row("crossing", [&](bool& ok) {
    const CrossingResult cr = crossing_check(l.spec, lambda0, opt.cross_validation_offset);
    ok = cr.satisfied;
    return std::string(ok ? "center eigenvalues change sign" : "no sign change");
  }));
  rows.push_back(verify_row("manifold_order", [&](bool& ok) {
    std::vector<double> radii;
    for (double r = 0.1; r > 0.002; r *= 0.5) radii.push_back(r);
    const OrderCheckResult oc = residual_order_check(l.spec, k, radii);
    ok = true;
    return "slope " + (std::isfinite(oc.slope) ? std::to_string(oc.slope) : std::string("inf"));
  }));
  for (double d : {-0.03, -0.01, 0.01, 0.03}) {
    const double lambda = lambda0 + d;
    char name[64];
    std::snprintf(name, sizeof name, "reduction_identity(lambda=%.4g)", lambda);
    rows.push_back(verify_row(name, [&](bool& ok) {
      ReductionOptions ro;
      ro.index = index_options(l.cfg);
      ro.index.symmetry_breaking = eta_for(l.spec, k, lambda);
      ro.search_radius = opt.search_radius;
      const auto r = reduction_identity_check(l.spec, k, lambda, ro);
      ok = r.equal;
      return "full " + std::to_string(r.lhs) + ", reduced " + std::to_string(r.rhs);
    }));
  }
  for (Side side : {Side::left, Side::right}) {
    rows.push_back(verify_row(std::string("set_index_") + to_string(side), [&](bool& ok) {
      const SetIndexResult s = bifurcating_set_index(l.spec, k, side, opt);
      ok = true;
      return "formula " + std::to_string(s.formula) + " = shell count " + std::to_string(s.shell.index);
    }));
  }
  rows.push_back(verify_row("local_branch", [&](bool& ok) {
    const LocalBranchResult lb = local_branch_existence(l.spec, k, opt);
    ok = true;
    return std::string("left ") + (lb.left ? "yes" : "no") + ", right " + (lb.right ? "yes" : "no");
  }));
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium index and bifurcation analysis for periodic Galerkin problems"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", common.spec_path, "problem specification (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--config", common.config_path, "run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_path, "output file (default: stdout)");
    sub->add_option("--seed", common.seed, "seed of the pseudo-random Newton starts");
  };

  double lambda = 1.0;
  std::optional<double> lambda_opt;
  int k = 1;
  std::optional<int> k_opt;
  std::string method = "count";
  double radius = 0.5;
  double block_radius = 0.05;
  std::string flux_path, csv_prefix;

  auto* spectrum = app.add_subcommand("spectrum", "spectral splitting of the linearization at u = 0");
  add_common(spectrum);
  spectrum->add_option("--lambda", lambda)->required();

  auto* reduce = app.add_subcommand("reduce", "quadratic center manifold and reduced field at lambda = k^2");
  add_common(reduce);
  reduce->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);

  auto* index = app.add_subcommand("index", "equilibrium index over a ball");
  add_common(index);
  index->add_option("--lambda", lambda)->required();
  index->add_option("--k", k_opt, "kernel wavenumber used for the reduced field");
  index->add_option("--method", method)->check(CLI::IsMember({"winding", "count", "both"}));
  index->add_option("--radius", radius, "ball radius")->check(CLI::PositiveNumber);

  auto* conley = app.add_subcommand("conley", "isolating block of the reduced origin");
  add_common(conley);
  conley->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);
  conley->add_option("--lambda", lambda_opt, "parameter (default k^2)");
  conley->add_option("--radius", block_radius, "block radius")->check(CLI::PositiveNumber);
  conley->add_option("--flux-csv", flux_path, "write theta,flux samples");

  auto* branch = app.add_subcommand("branch", "continue Galerkin branches from lambda = k^2");
  add_common(branch);
  branch->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);
  branch->add_option("--csv", csv_prefix, "write <prefix>_<i>.csv per branch");

  auto* bifurcate = app.add_subcommand("bifurcate", "full bifurcation report at lambda = k^2");
  add_common(bifurcate);
  bifurcate->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);

  auto* verify = app.add_subcommand("verify", "pass/fail table of the consistency checks");
  add_common(verify);
  verify->add_option("--k", k)->required()->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const Loaded l = load(common);
    CLI::App* sub = app.get_subcommands().front();
    json envelope = report_envelope(sub->get_name(), l.cfg, l.spec);
    if (sub == spectrum) {
      envelope["result"] = run_spectrum(l, lambda);
    } else if (sub == reduce) {
      envelope["result"] = run_reduce(l, k);
    } else if (sub == index) {
      envelope["result"] = run_index(l, lambda, method, radius, k_opt);
    } else if (sub == conley) {
      envelope["result"] = run_conley(l, k, lambda_opt, block_radius, flux_path);
    } else if (sub == branch) {
      envelope["result"] = run_branch(l, k, csv_prefix);
    } else if (sub == bifurcate) {
      envelope["result"] = run_bifurcate(l, k);
    } else if (sub == verify) {
      const auto rows = run_verify(l, k);
      bool all = true;
      std::string table;
      json arr = json::array();
      for (const auto& r : rows) {
        all &= r.pass;
        table += (r.pass ? "PASS  " : "FAIL  ") + r.name + "  " + r.detail + "\n";
        arr.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}});
      }
      std::cout << table;
      envelope["result"] = {{"checks", arr}, {"all_pass", all}};
      if (!common.out_path.empty()) emit(common, envelope);
      return all ? 0 : 2;
    }
    emit(common, envelope);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
