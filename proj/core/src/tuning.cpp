#include "apc/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apc/error.hpp"

namespace apc {

TuningParams optimal_params(double theta_min, double theta_max) {
  if (!(theta_min > 0.0) || !(theta_max <= 1.0 + 1e-10) || theta_min > theta_max ||
      !std::isfinite(theta_max)) {
    throw Error(ErrorCode::kInvalidSpectrum,
                "need 0 < theta_min <= theta_max <= 1, got theta_min=" +
                    std::to_string(theta_min) + " theta_max=" + std::to_string(theta_max));
  }
  TuningParams p;
  p.kappa = theta_max / theta_min;

  const double rmax = std::sqrt(theta_max);
  const double rmin = std::sqrt(theta_min);
  const double denom = (rmax + rmin) * (rmax + rmin);
  // theta_max may exceed 1 by rounding; clamp before the square roots.
  const double u = std::sqrt(std::max(0.0, 1.0 - theta_min));
  const double v = std::sqrt(std::max(0.0, 1.0 - theta_max));

  // gamma - 1 and eta - 1 in closed form, so gamma is exactly 1 at kappa = 1.
  p.gamma = 1.0 + (u - v) * (u - v) / denom;
  p.eta = 1.0 + (u + v) * (u + v) / denom;

  const double rk = std::sqrt(p.kappa);
  p.alpha = (rk - 1.0) / (rk + 1.0);
  return p;
}

TuningResiduals tuning_residuals(const TuningParams& params, double theta_min,
                                 double theta_max) {
  const double prod = (params.gamma - 1.0) * (params.eta - 1.0);
  const double root = std::sqrt(std::max(0.0, prod));
  const double eg = params.eta * params.gamma;
  TuningResiduals r;
  r.upper = std::abs(theta_max * eg - (1.0 + root) * (1.0 + root));
  r.lower = std::abs(theta_min * eg - (1.0 - root) * (1.0 - root));
  r.alpha_identity = std::abs(prod - params.alpha * params.alpha);
  return r;
}

}  // namespace apc
