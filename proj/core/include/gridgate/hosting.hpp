#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gridgate/grid.hpp"
#include "gridgate/lf_validation.hpp"
#include "gridgate/qp.hpp"
#include "gridgate/sensitivity.hpp"

namespace gridgate {

struct ConvexityViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateCandidateSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverStall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EconomicParams {
  double c_cap = 1500.0;         // CHF/kWp turnkey
  double lifespan_years = 20.0;  // r
  double discount_rate = 0.02;   // i, fraction per year
  double c_plus = 0.25;          // CHF/kWh retail tariff
  double c_minus = 0.14;         // CHF/kWh feed-in tariff
};

/// (1 - (1+i)^-r) / i. Converts a constant annual cash flow over r years at
/// discount rate i into present value. The i -> 0 limit is r; i = 0 itself
/// is outside the precondition.
double npv_factor(double discount_rate, double lifespan_years);

/// Lifetime multiplier applied to a one-day recurring cost.
inline double annualization(const EconomicParams& e) {
  return 365.0 * npv_factor(e.discount_rate, e.lifespan_years);
}

/// Lifetime multiplier applied to the per-hour fairness tariff lambda; the
/// penalty accrues over time exactly like the energy tariffs.
inline double fairness_scale(const EconomicParams& e) { return 24.0 * annualization(e); }

double capex(const Eigen::VectorXd& alpha_kwp, double c_cap);

/// Retail/feed-in cost of one energy exchange: c+[x]+ - c-[x]- = max(c+x, c-x),
/// x in kWh (positive = drawn from the grid).
double tariff_cost(double energy_kwh, const EconomicParams& econ);

/// Exact piecewise lifetime bill of the candidate prosumers (annualized one
/// day times 365, NPV-adjusted). Reporting-path formula, independent of the
/// optimizer's epigraph reformulation.
double opex_bill(const Eigen::VectorXd& alpha_kwp, const Eigen::MatrixXd& load_kw,
                 const Eigen::VectorXd& ghat, double dt_hours, const EconomicParams& econ);

/// Sample variance of the per-unit installed capacity alpha_n / pbar_n.
double unfairness(const Eigen::VectorXd& alpha_kwp, const Eigen::VectorXd& pbar_kw);

/// Linear constraint rows over the alpha variables only.
struct ConstraintSet {
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd b;
  std::vector<std::string> tags;
};

/// Voltage-band, line-ampacity and transformer polygon rows from the
/// per-step affine maps. The apparent-power circle is inscribed by 16
/// half-planes (rating shrunk by cos(pi/16) so the polygon stays inside).
ConstraintSet build_grid_constraints(const std::vector<AffineStepMap>& maps,
                                     const NetworkModel& net, const Grid& grid,
                                     const LimitSet& limits);

struct HostingConfig {
  EconomicParams econ;
  LimitSet limits;
  NormalizedCurve load_curve;
  NormalizedCurve pv_curve;
  double power_factor = 0.9;
  std::optional<double> s_base_kva;
  double lambda = 0.0;  // CHF per pu^2 per hour of unfair allocation
  std::optional<std::map<std::string, double>> alpha_max_kwp;
  NewtonOptions newton;
  int refine_passes = 1;  // successive linearization; 1 = pure linear model
  double refine_tol_kwp = 0.1;
};

/// Assembled convex program: epigraph bill + grid rows + nominal-power caps
/// + bounds, with the fairness quadratic kept separate so that lambda sweeps
/// reuse the assembly.
struct HostingProblem {
  std::vector<std::string> candidate_ids;
  std::vector<int> candidate_buses;
  Eigen::VectorXd pbar_kw;
  Eigen::MatrixXd load_kw;  // nc x T
  Eigen::VectorXd ghat;     // T
  double dt_hours = 1.0 / 6.0;
  double s_base_kva = 0.0;
  EconomicParams econ;
  double lambda = 0.0;

  int n_alpha = 0;
  int n_e = 0;
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd b;
  std::vector<std::string> row_tags;
  Eigen::VectorXd lin_cost;
  double const_daily_bill = 0.0;  // CHF/day outside the epigraph variables
  Eigen::MatrixXd fair_q;         // nc x nc; M_U = alpha' Q alpha
};

struct HostingSolution {
  std::vector<std::string> candidate_ids;
  Eigen::VectorXd alpha_kwp;
  Eigen::VectorXd alpha_per_unit;
  double j_capex = 0.0;     // CHF
  double j_opex = 0.0;      // CHF, lifetime NPV
  double m_u = 0.0;         // pu^2
  double j_fairness = 0.0;  // CHF, lambda * fairness_scale * M_U
  double objective = 0.0;   // CHF, recomputed from alpha
  /// The optimizer's own optimum (epigraph route, plus the constant bill
  /// part); agreement with `objective` validates the reformulation.
  double solver_objective = 0.0;
  double total_kwp = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<std::string> binding;
};

/// Builds the problem from a validated grid: multi-period base load flow,
/// per-step sensitivities, constraint assembly. installed_pv sets the
/// linearization operating point (empty for the standard load-only point).
HostingProblem build_hosting_problem(const Grid& grid, const HostingConfig& cfg,
                                     const std::map<std::string, double>& installed_pv = {});

/// Solves the convex program and recomputes every reported figure from
/// alpha via the exact formulas.
HostingSolution solve_hosting(const HostingProblem& problem);

/// build + solve, with optional successive-linearization refinement.
HostingSolution solve_hosting(const Grid& grid, const HostingConfig& cfg);

struct SweepRow {
  double lambda = 0.0;
  bool ok = false;
  std::string error;
  HostingSolution solution;
};

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0, 1, 10, 100, 1000, 10000, 100000, 1000000};
  return grid;
}

/// One solve per lambda (ascending); solver errors are recorded per row and
/// the sweep continues.
std::vector<SweepRow> sweep_lambda(const HostingProblem& problem,
                                   const std::vector<double>& lambdas);

std::string pareto_to_csv(const std::vector<SweepRow>& rows);
std::string alpha_to_csv(const HostingSolution& sol);

}  // namespace gridgate
