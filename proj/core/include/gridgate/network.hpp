#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>

#include "gridgate/per_unit.hpp"

namespace gridgate {

using Complex = std::complex<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;
using SparseReal = Eigen::SparseMatrix<double>;

/// A branch with series impedance below 1e-9 pu cannot be stamped.
struct ZeroImpedance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bus admittance matrix plus the invariants it is built to satisfy
/// (symmetry, off-diagonals = minus branch admittance).
using AdmittanceMatrix = SparseComplex;

/// Series admittances and per-endpoint shunts of every in-service branch.
/// Row order matches incidence_matrix. For pi-model lines the endpoint shunt
/// is j*b/2; an off-nominal transformer tap contributes the usual ratio
/// correction terms so that A' * diag(series) * A plus shunts reproduces the
/// exact two-port stamp.
struct PrimitiveAdmittance {
  Eigen::VectorXcd series;
  Eigen::VectorXcd shunt_from;
  Eigen::VectorXcd shunt_to;
};

/// Branch-to-node matrix over in-service branches: +1 at the from column,
/// -1 at the to column.
SparseReal incidence_matrix(const PerUnitGrid& grid);

PrimitiveAdmittance primitive_admittance(const PerUnitGrid& grid);

AdmittanceMatrix bus_admittance(const SparseReal& incidence, const PrimitiveAdmittance& prim);

/// In-service branches in incidence-row order.
std::vector<const PerUnitBranch*> in_service_branches(const PerUnitGrid& grid);

/// Everything downstream modules need about one network: per-unit data,
/// incidence, primitive and bus admittance, assembled once.
struct NetworkModel {
  PerUnitGrid pu;
  std::vector<PerUnitBranch> branches;  // in-service, incidence-row order
  SparseReal incidence;
  PrimitiveAdmittance prim;
  AdmittanceMatrix y_bus;

  int n_bus() const { return static_cast<int>(pu.bus_ids.size()); }
  int n_branch() const { return static_cast<int>(branches.size()); }
};

NetworkModel build_network(const PerUnitGrid& grid);

/// Complex current at the from end of every branch: y * (V_from - V_to) plus
/// the from-end shunt contribution.
Eigen::VectorXcd branch_currents(const NetworkModel& net, const Eigen::VectorXcd& v);

/// Buses reachable from the slack through in-service branches.
std::vector<bool> reachable_from_slack(const NetworkModel& net);

}  // namespace gridgate
