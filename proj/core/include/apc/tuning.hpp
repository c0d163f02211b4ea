#pragma once

namespace apc {

/// Step size gamma (agents), momentum eta (server), contraction factor alpha
/// and kappa = theta_max / theta_min of the consensus matrix.
struct TuningParams {
  double gamma = 1.0;
  double eta = 1.0;
  double alpha = 0.0;
  double kappa = 1.0;
};

/// Closed-form optimal parameters from the extreme eigenvalues of X.
/// gamma takes the minus branch of the square-root term, eta the plus branch.
/// Throws InvalidSpectrum unless 0 < theta_min <= theta_max <= 1 (+1e-10).
TuningParams optimal_params(double theta_min, double theta_max);

// Residuals of the optimality conditions
//   theta_max * eta * gamma = (1 + sqrt((gamma-1)(eta-1)))^2
//   theta_min * eta * gamma = (1 - sqrt((gamma-1)(eta-1)))^2
// and of the identity alpha^2 = (gamma-1)(eta-1).
struct TuningResiduals {
  double upper = 0.0;
  double lower = 0.0;
  double alpha_identity = 0.0;
};

TuningResiduals tuning_residuals(const TuningParams& params, double theta_min,
                                 double theta_max);

}  // namespace apc
