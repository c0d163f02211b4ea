#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "apc/core_model.hpp"

namespace apc {

enum class NoiseDistribution { kGaussian, kUniform };

struct InstanceSpec {
  Index m = 0;
  Index s = 0;
  std::optional<double> target_kappa;
  double noise_power = 0.0;  // per-entry variance of w
  NoiseDistribution noise = NoiseDistribution::kGaussian;
  std::optional<RealVector> x_star;  // drawn N(0, I) when absent
};

/// Real-valued instance y = A x* + w.
///
/// Without a target, A is i.i.d. standard normal. With a target kappa, A is a
/// blend (1 - beta) F + beta E of an equal-norm tight frame F (kappa(X) = 1)
/// and a Gaussian matrix E, with beta found by bisection on the measured
/// kappa(X) until it lies within 2% of the target. If E itself is too well
/// conditioned its last column is halved until kappa(E) exceeds the target.
///
/// Draw order is A, then x*, then a unit-variance noise shape scaled by
/// sqrt(noise_power), so equal seeds give proportional noise across powers.
LinearSystem generate_instance(const InstanceSpec& spec, std::mt19937_64& rng);

// Equal-norm tight frame with the given shape: rows of unit length and
// F^T F = (m / s) I. An m = s result is orthogonal.
RealMatrix tight_frame(Index m, Index s, std::mt19937_64& rng);

double measured_kappa(const RealMatrix& a);

// Counter-based stream splitting (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter);

}  // namespace apc
