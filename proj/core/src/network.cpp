#include "gridgate/network.hpp"

#include <queue>

namespace gridgate {

std::vector<const PerUnitBranch*> in_service_branches(const PerUnitGrid& grid) {
  std::vector<const PerUnitBranch*> out;
  for (const auto& b : grid.branches)
    if (b.in_service) out.push_back(&b);
  return out;
}

SparseReal incidence_matrix(const PerUnitGrid& grid) {
  const auto branches = in_service_branches(grid);
  SparseReal a(static_cast<int>(branches.size()), static_cast<int>(grid.bus_ids.size()));
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(branches.size() * 2);
  for (int r = 0; r < (int)branches.size(); ++r) {
    trips.emplace_back(r, branches[r]->from_bus, 1.0);
    trips.emplace_back(r, branches[r]->to_bus, -1.0);
  }
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

PrimitiveAdmittance primitive_admittance(const PerUnitGrid& grid) {
  const auto branches = in_service_branches(grid);
  PrimitiveAdmittance prim;
  const int nb = static_cast<int>(branches.size());
  prim.series.resize(nb);
  prim.shunt_from.resize(nb);
  prim.shunt_to.resize(nb);
  for (int r = 0; r < nb; ++r) {
    const PerUnitBranch& b = *branches[r];
    if (std::abs(b.z_series) < 1e-9)
      throw ZeroImpedance("branch '" + b.id + "' has |z| < 1e-9 pu");
    const Complex y = 1.0 / b.z_series;
    const Complex jb_half(0.0, b.b_shunt / 2.0);
    const double rho = b.tap_ratio;
    // Off-nominal ratio folded into series + endpoint shunts:
    //   Y_ff = y/rho^2, Y_ft = -y/rho, Y_tt = y.
    prim.series(r) = y / rho;
    prim.shunt_from(r) = jb_half + y * (1.0 - rho) / (rho * rho);
    prim.shunt_to(r) = jb_half + y * (rho - 1.0) / rho;
  }
  return prim;
}

AdmittanceMatrix bus_admittance(const SparseReal& incidence, const PrimitiveAdmittance& prim) {
  const int nb = static_cast<int>(incidence.rows());
  const int n = static_cast<int>(incidence.cols());
  SparseComplex a = incidence.cast<Complex>();
  SparseComplex y_series(nb, nb);
  std::vector<Eigen::Triplet<Complex>> diag;
  diag.reserve(nb);
  for (int r = 0; r < nb; ++r) diag.emplace_back(r, r, prim.series(r));
  y_series.setFromTriplets(diag.begin(), diag.end());

  AdmittanceMatrix y = SparseComplex(a.transpose()) * y_series * a;

  // Endpoint shunts go on the diagonal; endpoint buses read off the incidence
  // (+1 entry = from, -1 entry = to). Column-major walk.
  Eigen::VectorXcd shunt_diag = Eigen::VectorXcd::Zero(n);
  for (int c = 0; c < n; ++c) {
    for (SparseReal::InnerIterator it(incidence, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (it.value() > 0)
        shunt_diag(c) += prim.shunt_from(r);
      else
        shunt_diag(c) += prim.shunt_to(r);
    }
  }
  for (int c = 0; c < n; ++c)
    if (shunt_diag(c) != Complex(0.0, 0.0)) y.coeffRef(c, c) += shunt_diag(c);
  y.makeCompressed();
  return y;
}

NetworkModel build_network(const PerUnitGrid& grid) {
  NetworkModel net;
  net.pu = grid;
  for (const auto* b : in_service_branches(grid)) net.branches.push_back(*b);
  net.incidence = incidence_matrix(grid);
  net.prim = primitive_admittance(grid);
  net.y_bus = bus_admittance(net.incidence, net.prim);
  return net;
}

Eigen::VectorXcd branch_currents(const NetworkModel& net, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd i(net.n_branch());
  for (int b = 0; b < net.n_branch(); ++b) {
    const auto& br = net.branches[b];
    i(b) = net.prim.series(b) * (v(br.from_bus) - v(br.to_bus)) +
           net.prim.shunt_from(b) * v(br.from_bus);
  }
  return i;
}

std::vector<bool> reachable_from_slack(const NetworkModel& net) {
  std::vector<std::vector<int>> adj(net.n_bus());
  for (const auto& b : net.branches) {
    adj[b.from_bus].push_back(b.to_bus);
    adj[b.to_bus].push_back(b.from_bus);
  }
  std::vector<bool> seen(net.n_bus(), false);
  std::queue<int> q;
  q.push(net.pu.slack_bus);
  seen[net.pu.slack_bus] = true;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int w : adj[u])
      if (!seen[w]) {
        seen[w] = true;
        q.push(w);
      }
  }
  return seen;
}

}  // namespace gridgate
