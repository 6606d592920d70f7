#include "gridgate/hosting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "gridgate/parallel.hpp"

namespace gridgate {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

constexpr int kPolygonCuts = 16;

}  // namespace

double npv_factor(double discount_rate, double lifespan_years) {
  if (!(discount_rate > 0.0)) throw std::invalid_argument("discount rate must be > 0");
  if (lifespan_years < 0.0) throw std::invalid_argument("lifespan must be >= 0");
  return (1.0 - std::pow(1.0 + discount_rate, -lifespan_years)) / discount_rate;
}

double capex(const Eigen::VectorXd& alpha_kwp, double c_cap) {
  if ((alpha_kwp.array() < 0.0).any()) throw std::invalid_argument("alpha must be >= 0");
  return alpha_kwp.sum() * c_cap;
}

double tariff_cost(double energy_kwh, const EconomicParams& econ) {
  return std::max(econ.c_plus * energy_kwh, econ.c_minus * energy_kwh);
}

double opex_bill(const Eigen::VectorXd& alpha_kwp, const Eigen::MatrixXd& load_kw,
                 const Eigen::VectorXd& ghat, double dt_hours, const EconomicParams& econ) {
  const int nc = static_cast<int>(load_kw.rows());
  const int t_count = static_cast<int>(load_kw.cols());
  double daily = 0.0;
  for (int c = 0; c < nc; ++c)
    for (int t = 0; t < t_count; ++t) {
      const double x_kwh = (load_kw(c, t) - alpha_kwp(c) * ghat(t)) * dt_hours;
      daily += tariff_cost(x_kwh, econ);
    }
  return daily * annualization(econ);
}

double unfairness(const Eigen::VectorXd& alpha_kwp, const Eigen::VectorXd& pbar_kw) {
  const int nc = static_cast<int>(alpha_kwp.size());
  if (nc < 2) throw DegenerateCandidateSet("unfairness needs at least 2 candidates");
  if ((pbar_kw.array() <= 0.0).any())
    throw std::invalid_argument("candidate nominal powers must be > 0");
  const Eigen::VectorXd r = alpha_kwp.cwiseQuotient(pbar_kw);
  const double mean = r.mean();
  return (r.array() - mean).square().sum() / (nc - 1);
}

ConstraintSet build_grid_constraints(const std::vector<AffineStepMap>& maps,
                                     const NetworkModel& net, const Grid& grid,
                                     const LimitSet& limits) {
  ConstraintSet cs;
  const int nc = maps.empty() ? 0 : static_cast<int>(maps.front().dv.cols());
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;

  auto push_row = [&](const Eigen::RowVectorXd& coeffs, double bound, std::string tag) {
    const int r = static_cast<int>(rhs.size());
    for (int c = 0; c < nc; ++c)
      if (coeffs(c) != 0.0) trips.emplace_back(r, c, coeffs(c));
    rhs.push_back(bound);
    cs.tags.push_back(std::move(tag));
  };

  const double s_gcp_pu =
      net.pu.transformer_rated_s_kva ? *net.pu.transformer_rated_s_kva / net.pu.s_base_kva : 0.0;
  const double shrink = std::cos(std::numbers::pi / kPolygonCuts);

  for (const auto& map : maps) {
    const std::string ts = "t" + std::to_string(map.step);

    for (int k = 0; k < net.n_bus(); ++k) {
      if (k == net.pu.slack_bus) continue;
      const Node* node = grid.find_node(net.pu.bus_ids[k]);
      const double band =
          node->voltage_level == VoltageLevel::lv ? limits.v_band_lv : limits.v_band_mv;
      push_row(map.dv.row(k), (1.0 + band) - map.v0(k), "v-hi@" + node->id + "@" + ts);
      push_row(-map.dv.row(k), map.v0(k) - (1.0 - band), "v-lo@" + node->id + "@" + ts);
    }

    for (int b = 0; b < net.n_branch(); ++b) {
      const auto& br = net.branches[b];
      if (br.is_transformer || !br.ampacity_pu) continue;
      push_row(map.di.row(b), *br.ampacity_pu - map.i0(b), "ampacity@" + br.id + "@" + ts);
    }

    if (s_gcp_pu > 0.0) {
      for (int k = 0; k < kPolygonCuts; ++k) {
        const double th = 2.0 * std::numbers::pi * k / kPolygonCuts;
        const double ck = std::cos(th), sk = std::sin(th);
        push_row(ck * map.dp_slack + sk * map.dq_slack,
                 s_gcp_pu * shrink - ck * map.p_slack0 - sk * map.q_slack0,
                 "transformer@cut" + std::to_string(k) + "@" + ts);
      }
    }
  }

  cs.a.resize(static_cast<int>(rhs.size()), nc);
  cs.a.setFromTriplets(trips.begin(), trips.end());
  cs.b = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<int>(rhs.size()));
  return cs;
}

HostingProblem build_hosting_problem(const Grid& grid, const HostingConfig& cfg,
                                     const std::map<std::string, double>& installed_pv) {
  if (cfg.econ.c_plus < cfg.econ.c_minus)
    throw ConvexityViolated("retail tariff below feed-in tariff breaks the epigraph "
                            "reformulation (c+ must be >= c-)");

  HostingProblem prob;
  prob.econ = cfg.econ;
  prob.lambda = cfg.lambda;
  prob.dt_hours = cfg.load_curve.dt_hours;
  prob.s_base_kva = cfg.s_base_kva.value_or(default_s_base_kva(grid));

  const double s_base = prob.s_base_kva;
  const PerUnitGrid pu = to_per_unit(grid, s_base);
  const NetworkModel net = build_network(pu);

  // Candidate set: load nodes, canonical order.
  for (const auto& id : grid.sorted_node_ids()) {
    const Node* n = grid.find_node(id);
    if (n->nominal_power > 0.0) {
      prob.candidate_ids.push_back(id);
      prob.candidate_buses.push_back(pu.bus_of(id));
    }
  }
  const int nc = static_cast<int>(prob.candidate_ids.size());
  if (nc < 2)
    throw DegenerateCandidateSet("hosting allocation needs at least 2 load nodes");

  prob.pbar_kw.resize(nc);
  for (int c = 0; c < nc; ++c)
    prob.pbar_kw(c) = grid.find_node(prob.candidate_ids[c])->nominal_power;

  const int t_count = cfg.load_curve.steps();
  prob.ghat.resize(t_count);
  for (int t = 0; t < t_count; ++t) prob.ghat(t) = cfg.pv_curve.values[t];
  prob.load_kw.resize(nc, t_count);
  for (int c = 0; c < nc; ++c)
    for (int t = 0; t < t_count; ++t)
      prob.load_kw(c, t) = prob.pbar_kw(c) * cfg.load_curve.values[t];

  // Base operating point per step and its linearization.
  const InjectionProfile prof =
      synthesize_injections(grid, cfg.load_curve, cfg.pv_curve, installed_pv, cfg.power_factor);
  const LoadFlowResult base = multi_period_loadflow(net, prof, {1.0, 0.0}, cfg.newton);
  if (!base.all_converged())
    throw Infeasible("base load flow did not converge; validate the grid first");

  std::vector<int> pv_steps;
  for (int t = 0; t < t_count; ++t)
    if (prob.ghat(t) > 1e-12) pv_steps.push_back(t);

  // Linearization reference point: the affine maps come out anchored at the
  // base operating state, so a non-zero installed_pv must be subtracted to
  // re-anchor them at alpha = 0.
  Eigen::VectorXd alpha0 = Eigen::VectorXd::Zero(nc);
  for (int c = 0; c < nc; ++c)
    if (auto it = installed_pv.find(prob.candidate_ids[c]); it != installed_pv.end())
      alpha0(c) = it->second;

  std::vector<AffineStepMap> maps(pv_steps.size());
  parallel_for(static_cast<int>(pv_steps.size()), [&](int i) {
    const int t = pv_steps[i];
    const SensitivitySet sens = compute_sensitivities(net, base.v.col(t), t);
    maps[i] = linearize_step(sens, net, base, t, prob.ghat(t), prob.candidate_buses);
    if ((alpha0.array() != 0.0).any()) {
      maps[i].v0 -= maps[i].dv * alpha0;
      maps[i].i0 -= maps[i].di * alpha0;
      maps[i].p_slack0 -= maps[i].dp_slack.dot(alpha0);
      maps[i].q_slack0 -= maps[i].dq_slack.dot(alpha0);
    }
  });

  const ConstraintSet grid_rows = build_grid_constraints(maps, net, grid, cfg.limits);

  // Stack: grid rows | nominal-power caps | epigraph | bounds.
  prob.n_alpha = nc;
  prob.n_e = nc * static_cast<int>(pv_steps.size());
  const int n_var = prob.n_alpha + prob.n_e;
  const double k_annual = annualization(cfg.econ);

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  prob.row_tags.clear();

  for (int j = 0; j < grid_rows.a.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(grid_rows.a, j); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), j, it.value());
  rhs.assign(grid_rows.b.data(), grid_rows.b.data() + grid_rows.b.size());
  prob.row_tags = grid_rows.tags;

  auto add_row = [&](std::string tag) -> int {
    rhs.push_back(0.0);
    prob.row_tags.push_back(std::move(tag));
    return static_cast<int>(rhs.size()) - 1;
  };

  // Nominal-power caps: alpha * ghat_t <= load + pbar. The mirrored bound
  // load - alpha*ghat <= pbar holds automatically for alpha >= 0 because the
  // load never exceeds pbar.
  for (size_t i = 0; i < pv_steps.size(); ++i) {
    const int t = pv_steps[i];
    for (int c = 0; c < nc; ++c) {
      const int r = add_row("cap@" + prob.candidate_ids[c] + "@t" + std::to_string(t));
      trips.emplace_back(r, c, prob.ghat(t));
      rhs[r] = prob.load_kw(c, t) + prob.pbar_kw(c);
    }
  }

  // Epigraph rows: e_ct >= c* dt (load - alpha ghat), both tariffs.
  auto e_index = [&](int c, int i) { return prob.n_alpha + i * nc + c; };
  for (size_t i = 0; i < pv_steps.size(); ++i) {
    const int t = pv_steps[i];
    for (int c = 0; c < nc; ++c) {
      for (const double tariff : {cfg.econ.c_plus, cfg.econ.c_minus}) {
        const int r = add_row((tariff == cfg.econ.c_plus ? "epi+@" : "epi-@") +
                              prob.candidate_ids[c] + "@t" + std::to_string(t));
        trips.emplace_back(r, c, -tariff * prob.dt_hours * prob.ghat(t));
        trips.emplace_back(r, e_index(c, static_cast<int>(i)), -1.0);
        rhs[r] = -tariff * prob.dt_hours * prob.load_kw(c, t);
      }
    }
  }

  for (int c = 0; c < nc; ++c) {
    const int r = add_row("alpha>=0@" + prob.candidate_ids[c]);
    trips.emplace_back(r, c, -1.0);
    rhs[r] = 0.0;
  }
  if (cfg.alpha_max_kwp) {
    for (int c = 0; c < nc; ++c) {
      auto it = cfg.alpha_max_kwp->find(prob.candidate_ids[c]);
      if (it == cfg.alpha_max_kwp->end()) continue;
      const int r = add_row("alpha-max@" + prob.candidate_ids[c]);
      trips.emplace_back(r, c, 1.0);
      rhs[r] = it->second;
    }
  }

  prob.a.resize(static_cast<int>(rhs.size()), n_var);
  prob.a.setFromTriplets(trips.begin(), trips.end());
  prob.b = Eigen::Map<Eigen::VectorXd>(rhs.data(), static_cast<int>(rhs.size()));

  prob.lin_cost.setZero(n_var);
  for (int c = 0; c < nc; ++c) prob.lin_cost(c) = cfg.econ.c_cap;
  for (int j = prob.n_alpha; j < n_var; ++j) prob.lin_cost(j) = k_annual;

  // Bill part with no PV coupling (ghat = 0 steps): load is non-negative,
  // so the retail tariff applies exactly.
  prob.const_daily_bill = 0.0;
  for (int t = 0; t < t_count; ++t) {
    if (prob.ghat(t) > 1e-12) continue;
    for (int c = 0; c < nc; ++c)
      prob.const_daily_bill += cfg.econ.c_plus * prob.load_kw(c, t) * prob.dt_hours;
  }

  // M_U = alpha' Q alpha with Q = D (I - J/nc) D / (nc - 1), D = diag(1/pbar).
  Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(nc, nc) - Eigen::MatrixXd::Constant(nc, nc, 1.0 / nc);
  Eigen::VectorXd inv_p = prob.pbar_kw.cwiseInverse();
  prob.fair_q = inv_p.asDiagonal() * centering * inv_p.asDiagonal() / (nc - 1);

  return prob;
}

HostingSolution solve_hosting(const HostingProblem& problem) {
  const int nc = problem.n_alpha;
  const int n_var = nc + problem.n_e;

  QpProblem qp;
  qp.a = problem.a;
  qp.b = problem.b;
  qp.q = problem.lin_cost;
  qp.p.resize(n_var, n_var);
  const double w = 2.0 * problem.lambda * fairness_scale(problem.econ);
  if (w > 0.0) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) trips.emplace_back(i, j, w * problem.fair_q(i, j));
    qp.p.setFromTriplets(trips.begin(), trips.end());
  }

  QpOptions opts;
  const QpResult res = solve_qp(qp, opts);
  if (!res.optimal) {
    std::ostringstream msg;
    msg << "hosting solve did not reach optimality (" << res.message
        << ", kkt residual " << res.kkt_residual << " after " << res.iterations
        << " iterations)";
    if (res.message == "iteration limit") throw SolverStall(msg.str());
    throw Infeasible(msg.str());
  }

  HostingSolution sol;
  sol.candidate_ids = problem.candidate_ids;
  sol.alpha_kwp = res.x.head(nc).cwiseMax(0.0);
  sol.alpha_per_unit = sol.alpha_kwp.cwiseQuotient(problem.pbar_kw);
  sol.iterations = res.iterations;
  sol.kkt_residual = res.kkt_residual;
  sol.total_kwp = sol.alpha_kwp.sum();

  // Report from the exact formulas, never from solver internals.
  sol.j_capex = capex(sol.alpha_kwp, problem.econ.c_cap);
  sol.j_opex = opex_bill(sol.alpha_kwp, problem.load_kw, problem.ghat, problem.dt_hours,
                         problem.econ);
  sol.m_u = unfairness(sol.alpha_kwp, problem.pbar_kw);
  sol.j_fairness = problem.lambda * fairness_scale(problem.econ) * sol.m_u;
  sol.objective = sol.j_capex + sol.j_opex + sol.j_fairness;
  sol.solver_objective =
      res.objective + annualization(problem.econ) * problem.const_daily_bill;

  const Eigen::VectorXd slack = problem.b - problem.a * res.x;
  for (int r = 0; r < slack.size(); ++r)
    if (slack(r) <= 1e-6 * (1.0 + std::abs(problem.b(r))))
      sol.binding.push_back(problem.row_tags[r]);
  return sol;
}

HostingSolution solve_hosting(const Grid& grid, const HostingConfig& cfg) {
  std::map<std::string, double> pv_point;
  HostingSolution sol;
  const int passes = std::clamp(cfg.refine_passes, 1, 5);
  for (int pass = 0; pass < passes; ++pass) {
    const HostingProblem prob = build_hosting_problem(grid, cfg, pv_point);
    HostingSolution next = solve_hosting(prob);
    if (pass > 0) {
      double max_delta = 0.0;
      for (int c = 0; c < next.alpha_kwp.size(); ++c)
        max_delta = std::max(max_delta,
                             std::abs(next.alpha_kwp(c) - sol.alpha_kwp(c)));
      sol = std::move(next);
      if (max_delta < cfg.refine_tol_kwp) break;
    } else {
      sol = std::move(next);
    }
    pv_point.clear();
    for (size_t c = 0; c < sol.candidate_ids.size(); ++c)
      pv_point[sol.candidate_ids[c]] = sol.alpha_kwp(static_cast<int>(c));
  }
  return sol;
}

std::vector<SweepRow> sweep_lambda(const HostingProblem& problem,
                                   const std::vector<double>& lambdas) {
  std::vector<SweepRow> rows(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), [&](int i) {
    SweepRow& row = rows[i];
    row.lambda = lambdas[i];
    HostingProblem p = problem;
    p.lambda = lambdas[i];
    try {
      row.solution = solve_hosting(p);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

std::string pareto_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "lambda,unfairness_pu2,cost_chf,total_kwp,kkt_residual\n";
  for (const auto& r : rows) {
    if (!r.ok) continue;
    const auto& s = r.solution;
    out << fmt(r.lambda) << ',' << fmt(s.m_u) << ',' << fmt(s.j_capex + s.j_opex) << ','
        << fmt(s.total_kwp) << ',' << fmt(s.kkt_residual) << "\n";
  }
  return out.str();
}

std::string alpha_to_csv(const HostingSolution& sol) {
  std::ostringstream out;
  out << "node_id,alpha_kwp,alpha_per_unit\n";
  for (size_t c = 0; c < sol.candidate_ids.size(); ++c)
    out << sol.candidate_ids[c] << ',' << fmt(sol.alpha_kwp(static_cast<int>(c))) << ','
        << fmt(sol.alpha_per_unit(static_cast<int>(c))) << "\n";
  return out.str();
}

}  // namespace gridgate
