#include "gridgate/lf_validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridgate {

namespace {

struct Worst {
  double measured = 0.0;
  double threshold = 0.0;
  int step = -1;
  int count = 0;
};

std::string step_summary(const Worst& w, const std::string& what) {
  std::ostringstream msg;
  msg << what << " at step " << w.step << " (" << w.count << " violating step"
      << (w.count == 1 ? "" : "s") << ")";
  return msg.str();
}

}  // namespace

InjectionProfile synthesize_injections(const Grid& grid, const NormalizedCurve& load,
                                       const NormalizedCurve& pv,
                                       const std::map<std::string, double>& installed_pv_kwp,
                                       double power_factor) {
  if (load.steps() != pv.steps() || std::abs(load.dt_hours - pv.dt_hours) > 1e-12)
    throw CurveMismatch("load and PV curves must share dt and step count");
  if (!(power_factor > 0.0 && power_factor <= 1.0))
    throw std::invalid_argument("power factor must be in (0, 1]");

  const auto ids = grid.sorted_node_ids();
  const int n = static_cast<int>(ids.size());
  const int t_count = load.steps();
  const double tan_phi = std::tan(std::acos(power_factor));

  InjectionProfile prof;
  prof.dt_hours = load.dt_hours;
  prof.p_kw.setZero(n, t_count);
  prof.q_kvar.setZero(n, t_count);

  for (int k = 0; k < n; ++k) {
    const Node* node = grid.find_node(ids[k]);
    const double pbar = node->nominal_power;
    double pv_kwp = 0.0;
    if (auto it = installed_pv_kwp.find(ids[k]); it != installed_pv_kwp.end())
      pv_kwp = it->second;
    for (int t = 0; t < t_count; ++t) {
      const double p_load = pbar * load.values[t];
      prof.p_kw(k, t) = p_load - pv_kwp * pv.values[t];
      prof.q_kvar(k, t) = p_load * tan_phi;  // PV at unity power factor
    }
  }
  return prof;
}

std::vector<Finding> detect_anomalies(const LoadFlowResult& result, const Grid& grid,
                                      const NetworkModel& net, const LimitSet& limits,
                                      bool verbose) {
  if (limits.v_band_lv <= 0.0 || limits.v_band_lv >= 0.2 || limits.v_band_mv <= 0.0 ||
      limits.v_band_mv >= 0.2)
    throw std::invalid_argument("voltage bands must lie in (0, 0.2)");
  std::vector<Finding> out;
  const int n = net.n_bus();
  const int t_count = static_cast<int>(result.v.cols());

  std::vector<int> bad_steps;
  for (int t = 0; t < t_count; ++t)
    if (!result.converged[t]) bad_steps.push_back(t);
  if (!bad_steps.empty()) {
    std::ostringstream msg;
    msg << bad_steps.size() << " of " << t_count << " steps did not converge (first: step "
        << bad_steps.front() << ")";
    out.push_back({"lf-nonconvergence",
                   Severity::error,
                   Phase::advanced,
                   {"grid", grid.slack_node},
                   msg.str(),
                   (double)bad_steps.size(),
                   0.0});
  }

  // Voltage band per node.
  std::map<int, Worst> v_worst;
  for (int k = 0; k < n; ++k) {
    const Node* node = grid.find_node(net.pu.bus_ids[k]);
    const double band =
        node->voltage_level == VoltageLevel::lv ? limits.v_band_lv : limits.v_band_mv;
    for (int t = 0; t < t_count; ++t) {
      if (!result.converged[t]) continue;
      const double vm = std::abs(result.v(k, t));
      const double dev = std::abs(vm - 1.0);
      if (dev <= band) continue;
      if (verbose) {
        std::ostringstream msg;
        msg << "node '" << node->id << "' |V| = " << vm << " pu at step " << t;
        out.push_back({"v-out-of-band", Severity::error, Phase::advanced, {"node", node->id},
                       msg.str(), vm, vm > 1.0 ? 1.0 + band : 1.0 - band});
      } else {
        Worst& w = v_worst[k];
        ++w.count;
        if (w.step < 0 || dev > std::abs(w.measured - 1.0)) {
          w.measured = vm;
          w.threshold = vm > 1.0 ? 1.0 + band : 1.0 - band;
          w.step = t;
        }
      }
    }
  }
  for (const auto& [k, w] : v_worst) {
    const std::string& id = net.pu.bus_ids[k];
    std::ostringstream what;
    what << "node '" << id << "' |V| = " << w.measured << " pu";
    out.push_back({"v-out-of-band", Severity::error, Phase::advanced, {"node", id},
                   step_summary(w, what.str()), w.measured, w.threshold});
  }

  // Line ampacity; the transformer branch is the grid connection point.
  const double gcp_amp_pu = [&]() -> double {
    if (limits.gcp_ampacity_a) {
      // Referred to the LV side of the transformer when present, else slack.
      int bus = net.pu.slack_bus;
      for (const auto& b : net.branches)
        if (b.is_transformer) bus = b.to_bus;
      return *limits.gcp_ampacity_a / net.pu.i_base_a(bus);
    }
    if (net.pu.transformer_rated_s_kva)
      return *net.pu.transformer_rated_s_kva / net.pu.s_base_kva;
    return 0.0;  // no rating known: check disabled
  }();

  std::map<int, Worst> i_worst;
  for (int b = 0; b < net.n_branch(); ++b) {
    const auto& br = net.branches[b];
    const double limit_pu = br.is_transformer ? gcp_amp_pu : br.ampacity_pu.value_or(0.0);
    if (limit_pu <= 0.0) continue;
    for (int t = 0; t < t_count; ++t) {
      if (!result.converged[t]) continue;
      const double mag = std::abs(result.i_branch(b, t));
      if (mag <= limit_pu) continue;
      if (verbose) {
        std::ostringstream msg;
        msg << "branch '" << br.id << "' |I| = " << mag << " pu at step " << t;
        out.push_back({br.is_transformer ? "gcp-overcurrent" : "line-overcurrent",
                       Severity::error, Phase::advanced,
                       EntityRef{br.is_transformer ? "transformer" : "line", br.id}, msg.str(),
                       mag, limit_pu});
      } else {
        Worst& w = i_worst[b];
        ++w.count;
        if (w.step < 0 || mag > w.measured) {
          w.measured = mag;
          w.threshold = limit_pu;
          w.step = t;
        }
      }
    }
  }
  for (const auto& [b, w] : i_worst) {
    const auto& br = net.branches[b];
    std::ostringstream what;
    what << "branch '" << br.id << "' |I| = " << w.measured << " pu ("
         << w.measured * net.pu.i_base_a(br.from_bus) << " A)";
    out.push_back({br.is_transformer ? "gcp-overcurrent" : "line-overcurrent", Severity::error,
                   Phase::advanced, EntityRef{br.is_transformer ? "transformer" : "line", br.id},
                   step_summary(w, what.str()), w.measured, w.threshold});
  }

  sort_findings(out);
  return out;
}

double default_s_base_kva(const Grid& grid) {
  if (grid.transformer && grid.transformer->rated_s) return *grid.transformer->rated_s;
  return 400.0;
}

AdvancedConfig default_advanced_config(const Grid& grid) {
  AdvancedConfig cfg;
  cfg.rules = RuleConfig::defaults_for(grid);
  cfg.load_curve = builtin_load_curve();
  cfg.pv_curve = builtin_pv_curve();
  return cfg;
}

std::vector<Finding> run_advanced_validation(const Grid& grid, const AdvancedConfig& cfg) {
  const auto basic = run_basic_validation(grid, cfg.rules);
  if (has_errors(basic))
    throw PrerequisiteFailed(
        "basic validation reported error-severity findings; fix those before the load-flow "
        "phase");

  const double s_base = cfg.s_base_kva.value_or(default_s_base_kva(grid));
  const PerUnitGrid pu = to_per_unit(grid, s_base);
  const NetworkModel net = build_network(pu);
  const InjectionProfile prof =
      synthesize_injections(grid, cfg.load_curve, cfg.pv_curve, {}, cfg.power_factor);

  std::vector<Finding> out;
  try {
    const LoadFlowResult result = multi_period_loadflow(net, prof, {1.0, 0.0}, cfg.newton);
    out = detect_anomalies(result, grid, net, cfg.limits, cfg.verbose);
  } catch (const SingularJacobian& e) {
    out.push_back({"lf-nonconvergence",
                   Severity::error,
                   Phase::advanced,
                   {"grid", grid.slack_node},
                   std::string("load flow is unsolvable: ") + e.what(),
                   std::nullopt,
                   std::nullopt});
  }
  return out;
}

}  // namespace gridgate
