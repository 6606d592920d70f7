#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridgate/grid_io.hpp"
#include "gridgate/hosting.hpp"
#include "gridgate/lf_validation.hpp"
#include "gridgate/loadflow.hpp"
#include "gridgate/profiles.hpp"
#include "gridgate/rules.hpp"

namespace fs = std::filesystem;
using namespace gridgate;

namespace {

// Exit codes: 0 clean, 1 findings present, 2 input/convergence failure,
// 3 solver failure.
constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct CommonOpts {
  std::string grid_path;
  std::string out_dir = ".";
  std::string load_curve = "builtin";
  std::string pv_curve = "builtin";
  int dt_minutes = 10;
  double kappa = 1.5;
  double section_min = 10.0;
  double section_max = 400.0;
  double power_factor = 0.9;
  double s_base = 0.0;  // 0 = derive from the transformer rating
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out) {
  cmd->add_option("--grid", o.grid_path, "grid file (JSON)")->required();
  auto* out = cmd->add_option("--out", o.out_dir, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--load-curve", o.load_curve, "'builtin' or a curve CSV path");
  cmd->add_option("--pv-curve", o.pv_curve, "'builtin' or a curve CSV path");
  cmd->add_option("--dt-minutes", o.dt_minutes, "time resolution of the daily curves")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--kappa", o.kappa, "length-vs-Manhattan ratio threshold");
  cmd->add_option("--section-min", o.section_min, "minimum cable section, mm2");
  cmd->add_option("--section-max", o.section_max, "maximum cable section, mm2");
  cmd->add_option("--power-factor", o.power_factor, "load power factor");
  cmd->add_option("--s-base", o.s_base, "per-unit power base, kVA");
  cmd->add_flag("--verbose", o.verbose, "per-step findings instead of coalesced ones");
}

NormalizedCurve resolve_curve(const std::string& spec, double dt_hours, bool pv) {
  if (spec == "builtin") return pv ? builtin_pv_curve(dt_hours) : builtin_load_curve(dt_hours);
  return load_curve(spec, dt_hours);
}

AdvancedConfig make_advanced_config(const Grid& grid, const CommonOpts& o) {
  AdvancedConfig cfg = default_advanced_config(grid);
  cfg.rules.length_ratio_kappa = o.kappa;
  cfg.rules.section_min = o.section_min;
  cfg.rules.section_max = o.section_max;
  const double dt_hours = o.dt_minutes / 60.0;
  cfg.load_curve = resolve_curve(o.load_curve, dt_hours, false);
  cfg.pv_curve = resolve_curve(o.pv_curve, dt_hours, true);
  cfg.power_factor = o.power_factor;
  if (o.s_base > 0) cfg.s_base_kva = o.s_base;
  cfg.verbose = o.verbose;
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

int cmd_validate(const CommonOpts& o) {
  const Grid grid = parse_grid(o.grid_path);
  AdvancedConfig cfg = make_advanced_config(grid, o);

  std::vector<Finding> findings = run_basic_validation(grid, cfg.rules);
  if (!has_errors(findings)) {
    auto advanced = run_advanced_validation(grid, cfg);
    findings.insert(findings.end(), advanced.begin(), advanced.end());
    sort_findings(findings);
  } else {
    std::cerr << "basic validation reported errors; skipping the load-flow phase\n";
  }

  write_file(fs::path(o.out_dir) / "findings.json", findings_to_json(findings));
  for (const auto& f : findings)
    std::cout << "[" << to_string(f.severity) << "] " << f.rule_id << " (" << f.entity.kind
              << " " << f.entity.id << "): " << f.message << "\n";
  std::cout << findings.size() << " finding(s), report written to "
            << (fs::path(o.out_dir) / "findings.json").string() << "\n";
  return has_errors(findings) ? kExitFindings : kExitClean;
}

int cmd_loadflow(const CommonOpts& o, bool allow_nonconverged) {
  const Grid grid = parse_grid(o.grid_path);
  AdvancedConfig cfg = make_advanced_config(grid, o);

  const auto basic = run_basic_validation(grid, cfg.rules);
  if (has_errors(basic)) {
    std::cerr << "error: grid does not pass basic validation; run 'gridgate validate'\n";
    return kExitInput;
  }

  const double s_base = cfg.s_base_kva.value_or(default_s_base_kva(grid));
  const NetworkModel net = build_network(to_per_unit(grid, s_base));
  const InjectionProfile prof =
      synthesize_injections(grid, cfg.load_curve, cfg.pv_curve, {}, cfg.power_factor);
  const LoadFlowResult result = multi_period_loadflow(net, prof, {1.0, 0.0}, cfg.newton);

  if (!result.all_converged() && !allow_nonconverged) {
    int bad = 0;
    for (char c : result.converged)
      if (!c) ++bad;
    std::cerr << "error: " << bad << " step(s) did not converge "
              << "(use --allow-nonconverged to keep partial results)\n";
    return kExitInput;
  }

  write_file(fs::path(o.out_dir) / "voltages.csv", voltages_to_csv(net, result));
  write_file(fs::path(o.out_dir) / "currents.csv", currents_to_csv(net, result));

  double v_min = 1e30, v_max = -1e30, loading_max = 0.0, slack_peak = 0.0;
  for (int t = 0; t < result.v.cols(); ++t) {
    if (!result.converged[t]) continue;
    for (int k = 0; k < result.v.rows(); ++k) {
      const double vm = std::abs(result.v(k, t));
      v_min = std::min(v_min, vm);
      v_max = std::max(v_max, vm);
    }
    for (int b = 0; b < net.n_branch(); ++b)
      if (net.branches[b].ampacity_pu)
        loading_max = std::max(
            loading_max, std::abs(result.i_branch(b, t)) / *net.branches[b].ampacity_pu);
    slack_peak = std::max(slack_peak, std::abs(result.slack_s(t)));
  }
  std::ostringstream summary;
  summary << "metric,value\n";
  summary << "v_min_pu," << v_min << "\n";
  summary << "v_max_pu," << v_max << "\n";
  summary << "max_line_loading_pct," << 100.0 * loading_max << "\n";
  summary << "peak_slack_kva," << slack_peak * s_base << "\n";
  write_file(fs::path(o.out_dir) / "summary.csv", summary.str());
  std::cout << summary.str();
  return kExitClean;
}

int ensure_validated(const Grid& grid, const AdvancedConfig& cfg) {
  const auto basic = run_basic_validation(grid, cfg.rules);
  if (has_errors(basic)) {
    std::cerr << "error: grid does not pass basic validation; run 'gridgate validate'\n";
    return kExitInput;
  }
  const auto advanced = run_advanced_validation(grid, cfg);
  if (has_errors(advanced)) {
    std::cerr << "error: grid fails load-flow validation; run 'gridgate validate'\n";
    return kExitInput;
  }
  return kExitClean;
}

HostingConfig make_hosting_config(const Grid& grid, const CommonOpts& o,
                                  const EconomicParams& econ, double lambda, int refine) {
  HostingConfig hc;
  hc.econ = econ;
  const AdvancedConfig cfg = make_advanced_config(grid, o);
  hc.limits = cfg.limits;
  hc.load_curve = cfg.load_curve;
  hc.pv_curve = cfg.pv_curve;
  hc.power_factor = o.power_factor;
  if (o.s_base > 0) hc.s_base_kva = o.s_base;
  hc.lambda = lambda;
  hc.refine_passes = refine;
  return hc;
}

void print_solution(const HostingSolution& sol, double lambda) {
  std::cout << "lambda " << lambda << ": total " << sol.total_kwp << " kWp\n"
            << "  J_capex    " << sol.j_capex << " CHF\n"
            << "  J_opex     " << sol.j_opex << " CHF (lifetime NPV)\n"
            << "  M_U        " << sol.m_u << " pu^2 (penalty " << sol.j_fairness << " CHF)\n"
            << "  objective  " << sol.objective << " CHF\n"
            << "  kkt residual " << sol.kkt_residual << ", " << sol.iterations
            << " iterations, " << sol.binding.size() << " binding constraint(s)\n";
}

std::string sensitivities_csv(const Grid& grid, const HostingConfig& hc) {
  const double s_base = hc.s_base_kva.value_or(default_s_base_kva(grid));
  const NetworkModel net = build_network(to_per_unit(grid, s_base));
  const InjectionProfile prof =
      synthesize_injections(grid, hc.load_curve, hc.pv_curve, {}, hc.power_factor);
  const LoadFlowResult base = multi_period_loadflow(net, prof, {1.0, 0.0}, hc.newton);
  std::vector<int> cand;
  for (int k = 0; k < net.n_bus(); ++k)
    if (grid.find_node(net.pu.bus_ids[k])->nominal_power > 0) cand.push_back(k);
  std::ostringstream out;
  out << "step,node_id,wrt_node_id,dv_dp_pu_per_pu\n";
  for (int t = 0; t < base.v.cols(); ++t) {
    if (hc.pv_curve.values[t] <= 1e-12) continue;
    const SensitivitySet sens = compute_sensitivities(net, base.v.col(t), t);
    for (int k = 0; k < net.n_bus(); ++k)
      for (int c : cand)
        out << t << ',' << net.pu.bus_ids[k] << ',' << net.pu.bus_ids[c] << ','
            << sens.dv_dp(k, c) << "\n";
  }
  return out.str();
}

int cmd_host(const CommonOpts& o, const EconomicParams& econ, double lambda, int refine,
             bool dump_sens) {
  const Grid grid = parse_grid(o.grid_path);
  const AdvancedConfig vcfg = make_advanced_config(grid, o);
  if (int rc = ensure_validated(grid, vcfg); rc != kExitClean) return rc;

  const HostingConfig hc = make_hosting_config(grid, o, econ, lambda, refine);
  const HostingSolution sol = solve_hosting(grid, hc);
  write_file(fs::path(o.out_dir) / "alpha.csv", alpha_to_csv(sol));
  if (dump_sens)
    write_file(fs::path(o.out_dir) / "sensitivities.csv", sensitivities_csv(grid, hc));
  print_solution(sol, lambda);
  return kExitClean;
}

int cmd_sweep(const CommonOpts& o, const EconomicParams& econ, std::vector<double> lambdas) {
  const Grid grid = parse_grid(o.grid_path);
  const AdvancedConfig vcfg = make_advanced_config(grid, o);
  if (int rc = ensure_validated(grid, vcfg); rc != kExitClean) return rc;

  if (lambdas.empty()) lambdas = default_lambda_grid();
  std::sort(lambdas.begin(), lambdas.end());

  const HostingConfig hc = make_hosting_config(grid, o, econ, 0.0, 1);
  const HostingProblem prob = build_hosting_problem(grid, hc);
  const auto rows = sweep_lambda(prob, lambdas);

  write_file(fs::path(o.out_dir) / "pareto.csv", pareto_to_csv(rows));
  bool any_failed = false;
  for (const auto& r : rows) {
    if (r.ok) {
      std::cout << "lambda " << r.lambda << ": M_U " << r.solution.m_u << ", cost "
                << r.solution.j_capex + r.solution.j_opex << " CHF, total "
                << r.solution.total_kwp << " kWp\n";
    } else {
      any_failed = true;
      std::cerr << "lambda " << r.lambda << ": solver error: " << r.error << "\n";
    }
  }
  return any_failed ? kExitSolver : kExitClean;
}

int cmd_export_dgs(const CommonOpts& o, bool have_out) {
  const Grid grid = parse_grid(o.grid_path);
  const std::string dgs = export_dgs(grid);
  if (have_out) {
    write_file(fs::path(o.out_dir) / "grid.dgs", dgs);
    std::cout << "wrote " << (fs::path(o.out_dir) / "grid.dgs").string() << "\n";
  } else {
    std::cout << dgs;
  }
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  std::cout.precision(12);
  CLI::App app{"gridgate - distribution-grid data validation and fair PV hosting capacity"};
  app.require_subcommand(1);

  CommonOpts opts;
  EconomicParams econ;
  bool allow_nonconverged = false;
  bool dump_sens = false;
  double lambda_single = 0.0;
  std::vector<double> lambda_list;
  int refine = 1;

  auto add_econ = [&](CLI::App* cmd) {
    cmd->add_option("--capex-per-kwp", econ.c_cap, "PV unit cost, CHF/kWp");
    cmd->add_option("--lifespan-years", econ.lifespan_years, "PV plant lifespan");
    cmd->add_option("--discount-rate", econ.discount_rate, "annual discount rate (fraction)");
    cmd->add_option("--retail-tariff", econ.c_plus, "retail electricity tariff, CHF/kWh");
    cmd->add_option("--feed-in-tariff", econ.c_minus, "feed-in tariff, CHF/kWh");
  };

  auto* validate = app.add_subcommand("validate", "rule checks plus offline load-flow checks");
  add_common(validate, opts, false);

  auto* loadflow = app.add_subcommand("loadflow", "multi-period load flow, results as CSV");
  add_common(loadflow, opts, true);
  loadflow->add_flag("--allow-nonconverged", allow_nonconverged,
                     "keep partial results when steps fail to converge");

  auto* host = app.add_subcommand("host", "fair PV hosting allocation at one lambda");
  add_common(host, opts, true);
  add_econ(host);
  host->add_option("--lambda", lambda_single, "fairness weight, CHF/pu^2");
  host->add_option("--refine-linearization", refine,
                   "successive linearization passes (default 1 = pure linear)");
  host->add_flag("--dump-sensitivities", dump_sens, "write sensitivities.csv");

  auto* sweep = app.add_subcommand("sweep", "Pareto sweep over a lambda list");
  add_common(sweep, opts, true);
  add_econ(sweep);
  sweep->add_option("--lambda", lambda_list, "lambda values")->delimiter(',');

  auto* dgs = app.add_subcommand("export-dgs", "interchange export (TYPE/ELEMENT/GRAPHIC)");
  add_common(dgs, opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return cmd_validate(opts);
    if (app.got_subcommand(loadflow)) return cmd_loadflow(opts, allow_nonconverged);
    if (app.got_subcommand(host))
      return cmd_host(opts, econ, lambda_single, refine, dump_sens);
    if (app.got_subcommand(sweep)) return cmd_sweep(opts, econ, lambda_list);
    if (app.got_subcommand(dgs)) return cmd_export_dgs(opts, dgs->count("--out") > 0);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ReferenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CurveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PrerequisiteFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Infeasible& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const SolverStall& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitClean;
}
