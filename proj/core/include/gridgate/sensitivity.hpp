#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gridgate/loadflow.hpp"
#include "gridgate/network.hpp"

namespace gridgate {

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Partial derivatives of voltage/current magnitudes and slack power with
/// respect to nodal active-power consumption (positive = consumption), taken
/// at one converged operating point. Slack row and column of dv_dp are zero.
struct SensitivitySet {
  Eigen::MatrixXd dv_dp;              // n_bus x n_bus, pu/pu
  Eigen::MatrixXd di_dp;              // n_branch x n_bus, pu/pu
  Eigen::RowVectorXd dpslack_dp;      // 1 x n_bus
  Eigen::RowVectorXd dqslack_dp;      // 1 x n_bus
  int operating_step = -1;            // which profile step this linearizes
};

/// Differentiates the nodal power-injection equations at the converged state
/// v, holding the slack voltage fixed and Q constant at PQ buses. Reuses the
/// Newton polar Jacobian: one factorization, one solve per injection bus.
SensitivitySet compute_sensitivities(const NetworkModel& net, const Eigen::VectorXcd& v,
                                     int operating_step = -1);

/// Affine predictors around one base step, in kWp of installed PV at the
/// candidate buses: |V|(alpha) = v0 + dv * alpha, etc. PV enters as negated
/// consumption scaled by the PV shape value of the step.
struct AffineStepMap {
  int step = -1;
  double ghat = 0.0;         // PV shape value at this step
  Eigen::VectorXd v0;        // n_bus, pu
  Eigen::VectorXd i0;        // n_branch, pu
  double p_slack0 = 0.0;     // pu
  double q_slack0 = 0.0;     // pu
  Eigen::MatrixXd dv;        // n_bus x n_candidate, pu per kWp
  Eigen::MatrixXd di;        // n_branch x n_candidate
  Eigen::RowVectorXd dp_slack;  // per kWp
  Eigen::RowVectorXd dq_slack;

  Eigen::VectorXd predict_v(const Eigen::VectorXd& alpha_kwp) const {
    return v0 + dv * alpha_kwp;
  }
  Eigen::VectorXd predict_i(const Eigen::VectorXd& alpha_kwp) const {
    return i0 + di * alpha_kwp;
  }
};

AffineStepMap linearize_step(const SensitivitySet& sens, const NetworkModel& net,
                             const LoadFlowResult& base, int step, double ghat,
                             const std::vector<int>& candidate_buses);

}  // namespace gridgate
