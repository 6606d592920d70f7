#include "gridgate/sensitivity.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/SparseLU>

namespace gridgate {

SensitivitySet compute_sensitivities(const NetworkModel& net, const Eigen::VectorXcd& v,
                                     int operating_step) {
  const int n = net.n_bus();
  const int nb = net.n_branch();
  const int slack = net.pu.slack_bus;

  PolarJacobian jac = assemble_polar_jacobian(net.y_bus, slack, v);
  const int m = static_cast<int>(jac.bus_of_pos.size());

  Eigen::SparseLU<SparseReal> lu;
  lu.compute(jac.j);
  if (lu.info() != Eigen::Success)
    throw SingularSystem("power-flow Jacobian is singular at this operating point");

  SensitivitySet sens;
  sens.operating_step = operating_step;
  sens.dv_dp.setZero(n, n);
  sens.di_dp.setZero(nb, n);
  sens.dpslack_dp.setZero(n);
  sens.dqslack_dp.setZero(n);

  const Eigen::VectorXcd i_branch = branch_currents(net, v);

  // Slack row of Y, needed for every injection bus below.
  std::vector<std::pair<int, Complex>> slack_row;
  for (int col = 0; col < net.y_bus.outerSize(); ++col)
    for (AdmittanceMatrix::InnerIterator it(net.y_bus, col); it; ++it)
      if (it.row() == slack) slack_row.emplace_back(col, it.value());

  // One solve per injection bus: d(state)/dP_n with P_n = consumption, so the
  // specified injection moves by -1.
  for (int nbus = 0; nbus < n; ++nbus) {
    if (nbus == slack) continue;  // slack absorbs; column stays zero
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m);
    rhs(jac.pos_of_bus[nbus]) = -1.0;
    const Eigen::VectorXd dx = lu.solve(rhs);
    if (!dx.allFinite()) throw SingularSystem("sensitivity solve produced non-finite values");

    // Complex voltage derivative per bus from the polar state derivative.
    Eigen::VectorXcd dv_c = Eigen::VectorXcd::Zero(n);
    for (int p = 0; p < m; ++p) {
      const int bus = jac.bus_of_pos[p];
      const double vm = std::abs(v(bus));
      const double th = std::arg(v(bus));
      const double dth = dx(p);
      const double dvm = dx(m + p);
      dv_c(bus) = std::polar(1.0, th) * Complex(dvm, vm * dth);
      sens.dv_dp(bus, nbus) = dvm;
    }

    for (int b = 0; b < nb; ++b) {
      const auto& br = net.branches[b];
      const Complex di = net.prim.series(b) * (dv_c(br.from_bus) - dv_c(br.to_bus)) +
                         net.prim.shunt_from(b) * dv_c(br.from_bus);
      const double imag_ = std::abs(i_branch(b));
      // Magnitude derivative is undefined at zero current; the modulus of the
      // complex derivative is a conservative upper bound there.
      sens.di_dp(b, nbus) =
          imag_ > 1e-9 ? (std::conj(i_branch(b)) * di).real() / imag_ : std::abs(di);
    }

    // S_s = V_s * conj(sum_k Y_sk V_k) with V_s fixed.
    Complex d_inj(0.0, 0.0);
    for (const auto& [col, y_sk] : slack_row) d_inj += y_sk * dv_c(col);
    const Complex ds_slack = v(slack) * std::conj(d_inj);
    sens.dpslack_dp(nbus) = ds_slack.real();
    sens.dqslack_dp(nbus) = ds_slack.imag();
  }
  return sens;
}

AffineStepMap linearize_step(const SensitivitySet& sens, const NetworkModel& net,
                             const LoadFlowResult& base, int step, double ghat,
                             const std::vector<int>& candidate_buses) {
  const int n = net.n_bus();
  const int nb = net.n_branch();
  const int nc = static_cast<int>(candidate_buses.size());

  AffineStepMap map;
  map.step = step;
  map.ghat = ghat;
  map.v0 = base.v.col(step).cwiseAbs();
  map.i0 = base.i_branch.col(step).cwiseAbs();
  map.p_slack0 = base.slack_s(step).real();
  map.q_slack0 = base.slack_s(step).imag();
  map.dv.resize(n, nc);
  map.di.resize(nb, nc);
  map.dp_slack.resize(nc);
  map.dq_slack.resize(nc);

  // One kWp at candidate c shifts that bus's consumption by -ghat kW.
  const double kw_to_pu = 1.0 / net.pu.s_base_kva;
  for (int c = 0; c < nc; ++c) {
    const int bus = candidate_buses[c];
    const double dp_cons_pu = -ghat * kw_to_pu;
    map.dv.col(c) = sens.dv_dp.col(bus) * dp_cons_pu;
    map.di.col(c) = sens.di_dp.col(bus) * dp_cons_pu;
    map.dp_slack(c) = sens.dpslack_dp(bus) * dp_cons_pu;
    map.dq_slack(c) = sens.dqslack_dp(bus) * dp_cons_pu;
  }
  return map;
}

}  // namespace gridgate
