#include "gridgate/loadflow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SparseLU>

#include "gridgate/parallel.hpp"

namespace gridgate {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

bool LoadFlowResult::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; });
}

Eigen::VectorXcd power_mismatch(const AdmittanceMatrix& y, int slack_bus,
                                const Eigen::VectorXcd& v,
                                const Eigen::VectorXcd& s_injection_pu) {
  Eigen::VectorXcd i = y * v;
  Eigen::VectorXcd mismatch(v.size());
  for (int k = 0; k < v.size(); ++k)
    mismatch(k) = k == slack_bus ? Complex(0, 0) : s_injection_pu(k) - v(k) * std::conj(i(k));
  return mismatch;
}

PolarJacobian assemble_polar_jacobian(const AdmittanceMatrix& y, int slack_bus,
                                      const Eigen::VectorXcd& v) {
  const int n = static_cast<int>(v.size());
  PolarJacobian out;
  out.pos_of_bus.assign(n, -1);
  for (int k = 0; k < n; ++k) {
    if (k == slack_bus) continue;
    out.pos_of_bus[k] = static_cast<int>(out.bus_of_pos.size());
    out.bus_of_pos.push_back(k);
  }
  const int m = static_cast<int>(out.bus_of_pos.size());

  Eigen::VectorXd vm(n), th(n);
  for (int k = 0; k < n; ++k) {
    vm(k) = std::abs(v(k));
    th(k) = std::arg(v(k));
  }
  // P_i, Q_i at the current state.
  Eigen::VectorXcd inj = y * v;
  Eigen::VectorXd p(n), q(n);
  for (int k = 0; k < n; ++k) {
    const Complex s = v(k) * std::conj(inj(k));
    p(k) = s.real();
    q(k) = s.imag();
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(y.nonZeros() * 4);
  for (int col = 0; col < y.outerSize(); ++col) {
    for (AdmittanceMatrix::InnerIterator it(y, col); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int k = col;
      if (i == slack_bus) continue;
      const double g = it.value().real();
      const double b = it.value().imag();
      const int pi = out.pos_of_bus[i];
      const int pk = out.pos_of_bus[k];
      if (i == k) {
        const double vi = vm(i);
        // dP/dtheta_i, dP/dV_i, dQ/dtheta_i, dQ/dV_i
        trips.emplace_back(pi, pi, -q(i) - b * vi * vi);
        trips.emplace_back(pi, m + pi, p(i) / vi + g * vi);
        trips.emplace_back(m + pi, pi, p(i) - g * vi * vi);
        trips.emplace_back(m + pi, m + pi, q(i) / vi - b * vi);
      } else {
        const double tik = th(i) - th(k);
        const double ct = std::cos(tik), st = std::sin(tik);
        const double vi = vm(i), vk = vm(k);
        const double dp_dth = vi * vk * (g * st - b * ct);
        const double dq_dth = -vi * vk * (g * ct + b * st);
        const double dp_dv = vi * (g * ct + b * st);
        const double dq_dv = vi * (g * st - b * ct);
        if (pk >= 0) {
          trips.emplace_back(pi, pk, dp_dth);
          trips.emplace_back(pi, m + pk, dp_dv);
          trips.emplace_back(m + pi, pk, dq_dth);
          trips.emplace_back(m + pi, m + pk, dq_dv);
        }
      }
    }
  }
  out.j.resize(2 * m, 2 * m);
  out.j.setFromTriplets(trips.begin(), trips.end());
  out.j.makeCompressed();
  return out;
}

namespace {

// Buses reachable from the slack through off-diagonal Y entries.
void check_connected(const AdmittanceMatrix& y, int slack_bus) {
  const int n = static_cast<int>(y.rows());
  std::vector<std::vector<int>> adj(n);
  for (int col = 0; col < y.outerSize(); ++col)
    for (AdmittanceMatrix::InnerIterator it(y, col); it; ++it)
      if (it.row() != col && std::abs(it.value()) > 0.0) {
        adj[col].push_back(static_cast<int>(it.row()));
      }
  std::vector<bool> seen(n, false);
  std::vector<int> stack{slack_bus};
  seen[slack_bus] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  for (int k = 0; k < n; ++k)
    if (!seen[k])
      throw SingularJacobian("bus " + std::to_string(k) + " is islanded from the slack");
}

}  // namespace

StepSolution solve_loadflow(const AdmittanceMatrix& y, int slack_bus, Complex slack_v,
                            const Eigen::VectorXcd& s_injection_pu, const NewtonOptions& opts) {
  const int n = static_cast<int>(y.rows());
  check_connected(y, slack_bus);
  StepSolution sol;
  sol.v = Eigen::VectorXcd::Constant(n, slack_v);  // flat start

  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    const Eigen::VectorXcd mis = power_mismatch(y, slack_bus, sol.v, s_injection_pu);
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
      worst = std::max({worst, std::abs(mis(k).real()), std::abs(mis(k).imag())});
    if (worst < opts.tolerance) {
      sol.converged = true;
      sol.iterations = iter;
      return sol;
    }
    if (iter == opts.max_iterations) break;

    PolarJacobian jac = assemble_polar_jacobian(y, slack_bus, sol.v);
    const int m = static_cast<int>(jac.bus_of_pos.size());
    Eigen::VectorXd rhs(2 * m);
    for (int pidx = 0; pidx < m; ++pidx) {
      const int bus = jac.bus_of_pos[pidx];
      rhs(pidx) = mis(bus).real();
      rhs(m + pidx) = mis(bus).imag();
    }

    Eigen::SparseLU<SparseReal> lu;
    lu.compute(jac.j);
    if (lu.info() != Eigen::Success) {
      sol.converged = false;
      sol.iterations = iter;
      return sol;
    }
    const Eigen::VectorXd dx = lu.solve(rhs);
    if (!dx.allFinite()) {
      sol.converged = false;
      sol.iterations = iter;
      return sol;
    }
    for (int pidx = 0; pidx < m; ++pidx) {
      const int bus = jac.bus_of_pos[pidx];
      const double vm = std::abs(sol.v(bus)) + dx(m + pidx);
      const double th = std::arg(sol.v(bus)) + dx(pidx);
      sol.v(bus) = std::polar(vm, th);
    }
  }
  sol.converged = false;
  sol.iterations = opts.max_iterations;
  return sol;
}

LoadFlowResult multi_period_loadflow(const NetworkModel& net, const InjectionProfile& profile,
                                     Complex slack_v, const NewtonOptions& opts) {
  const int n = net.n_bus();
  if (profile.n_bus() != n)
    throw std::invalid_argument("injection profile does not match the grid's bus count");

  const auto reach = reachable_from_slack(net);
  for (int k = 0; k < n; ++k)
    if (!reach[k])
      throw SingularJacobian("bus '" + net.pu.bus_ids[k] + "' is islanded from the slack");

  const int t_count = profile.n_step();
  LoadFlowResult res;
  res.v.resize(n, t_count);
  res.i_branch.resize(net.n_branch(), t_count);
  res.slack_s.resize(t_count);
  res.converged.assign(t_count, false);
  res.iterations.assign(t_count, 0);

  const double s_base = net.pu.s_base_kva;
  parallel_for(t_count, [&](int t) {
    Eigen::VectorXcd s_inj(n);
    for (int k = 0; k < n; ++k)
      s_inj(k) = -Complex(profile.p_kw(k, t), profile.q_kvar(k, t)) / s_base;
    const StepSolution sol = solve_loadflow(net.y_bus, net.pu.slack_bus, slack_v, s_inj, opts);
    res.v.col(t) = sol.v;
    res.converged[t] = sol.converged;
    res.iterations[t] = sol.iterations;
    res.i_branch.col(t) = branch_currents(net, sol.v);
    const Eigen::VectorXcd yv = net.y_bus * sol.v;
    res.slack_s(t) = sol.v(net.pu.slack_bus) * std::conj(yv(net.pu.slack_bus));
  });
  return res;
}

std::string voltages_to_csv(const NetworkModel& net, const LoadFlowResult& result) {
  std::ostringstream out;
  out << "step,node_id,v_re_pu,v_im_pu,v_mag_pu\n";
  for (int t = 0; t < result.v.cols(); ++t)
    for (int k = 0; k < result.v.rows(); ++k) {
      const Complex v = result.v(k, t);
      out << t << ',' << net.pu.bus_ids[k] << ',' << fmt(v.real()) << ',' << fmt(v.imag())
          << ',' << fmt(std::abs(v)) << "\n";
    }
  return out.str();
}

std::string currents_to_csv(const NetworkModel& net, const LoadFlowResult& result) {
  std::ostringstream out;
  out << "step,branch_id,i_re_pu,i_im_pu,i_mag_pu,i_a,loading_pct\n";
  for (int t = 0; t < result.i_branch.cols(); ++t)
    for (int b = 0; b < result.i_branch.rows(); ++b) {
      const auto& br = net.branches[b];
      const Complex i = result.i_branch(b, t);
      const double mag = std::abs(i);
      const double amps = mag * net.pu.i_base_a(br.from_bus);
      const double loading = br.ampacity_pu ? 100.0 * mag / *br.ampacity_pu : 0.0;
      out << t << ',' << br.id << ',' << fmt(i.real()) << ',' << fmt(i.imag()) << ','
          << fmt(mag) << ',' << fmt(amps) << ',' << fmt(loading) << "\n";
    }
  return out.str();
}

}  // namespace gridgate
