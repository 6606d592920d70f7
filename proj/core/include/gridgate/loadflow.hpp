#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gridgate/network.hpp"

namespace gridgate {

/// An in-service bus is unreachable from the slack; the load flow has no
/// solution.
struct SingularJacobian : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nodal consumption time series. Positive P = consumption, kW; rows follow
/// bus order, one column per time step.
struct InjectionProfile {
  Eigen::MatrixXd p_kw;
  Eigen::MatrixXd q_kvar;
  double dt_hours = 1.0 / 6.0;

  int n_bus() const { return static_cast<int>(p_kw.rows()); }
  int n_step() const { return static_cast<int>(p_kw.cols()); }
};

struct NewtonOptions {
  double tolerance = 1e-8;  // max |S mismatch| in pu
  int max_iterations = 30;
};

struct StepSolution {
  Eigen::VectorXcd v;  // pu
  bool converged = false;
  int iterations = 0;
};

/// Newton-Raphson in polar form, constant-PQ loads, flat start from the
/// slack phasor. Non-convergence is reported, never thrown; an island is
/// a SingularJacobian error.
StepSolution solve_loadflow(const AdmittanceMatrix& y, int slack_bus, Complex slack_v,
                            const Eigen::VectorXcd& s_injection_pu,
                            const NewtonOptions& opts = {});

struct LoadFlowResult {
  Eigen::MatrixXcd v;         // n_bus x T, pu
  Eigen::MatrixXcd i_branch;  // n_branch x T, pu (in-service branch order)
  Eigen::VectorXcd slack_s;   // T, pu
  // char, not bool: steps are written concurrently and vector<bool> packs
  // neighbours into one byte.
  std::vector<char> converged;
  std::vector<int> iterations;

  bool all_converged() const;
};

/// Independent single-step solves for every column of the profile; steps run
/// concurrently (GRIDGATE_THREADS caps the workers) with deterministic
/// assembly.
LoadFlowResult multi_period_loadflow(const NetworkModel& net, const InjectionProfile& profile,
                                     Complex slack_v = {1.0, 0.0},
                                     const NewtonOptions& opts = {});

/// Complex power mismatch at every non-slack bus for a candidate solution;
/// the solver-independent residual check.
Eigen::VectorXcd power_mismatch(const AdmittanceMatrix& y, int slack_bus,
                                const Eigen::VectorXcd& v,
                                const Eigen::VectorXcd& s_injection_pu);

/// Polar-form Jacobian of the power-injection equations at state v, ordered
/// [dtheta_nonslack; dvm_nonslack]. Shared by the Newton solver and the
/// sensitivity computation.
struct PolarJacobian {
  SparseReal j;                 // 2M x 2M, M = n_bus - 1
  std::vector<int> bus_of_pos;  // position -> bus index
  std::vector<int> pos_of_bus;  // bus index -> position, -1 for slack
};

PolarJacobian assemble_polar_jacobian(const AdmittanceMatrix& y, int slack_bus,
                                      const Eigen::VectorXcd& v);

/// CSV exports (one row per node per step / per branch per step).
std::string voltages_to_csv(const NetworkModel& net, const LoadFlowResult& result);
std::string currents_to_csv(const NetworkModel& net, const LoadFlowResult& result);

}  // namespace gridgate
