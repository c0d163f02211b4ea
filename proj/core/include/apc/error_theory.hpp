#pragma once

// Closed-form behaviour of the stacked error d(t) = [e_1(t); ...; e_M(t); ebar(t)]
// where e_l(t) = x_l(t) - x* and ebar(t) = xbar(t) - x*.
//
//   d(t) = G^t d(0) + (sum_{l<t} G^l) w_d = G^t d(0) + (I - G^t)(I - G)^{-1} w_d
//   d(inf) = (I - G)^{-1} w_d

#include <cstddef>
#include <span>
#include <vector>

#include "apc/core_model.hpp"
#include "apc/spectral.hpp"
#include "apc/tuning.hpp"

namespace apc {

struct StateVector {
  Vector d;
  std::size_t agents = 0;
  Index dim = 0;

  // 1-based agent block e_l, and the trailing consensus block ebar.
  Eigen::VectorBlock<const Vector> agent_block(std::size_t l) const {
    return d.segment(static_cast<Index>(l - 1) * dim, dim);
  }
  Eigen::VectorBlock<const Vector> consensus_block() const {
    return d.segment(static_cast<Index>(agents) * dim, dim);
  }
};

/// d(0): e_l(0) = -P_l x* + A_l^H (A_l A_l^H)^{-1} w_l, ebar(0) = mean of the e_l(0).
/// Throws MissingGroundTruth unless x* and w are both known.
StateVector initial_state(const LinearSystem& sys, std::span<const RowBlock> blocks,
                          std::span<const Projection> projections);

// Stacks an engine snapshot into the same layout (x_l - x*, xbar - x*).
StateVector stack_errors(std::span<const Vector> agent_solutions, const Vector& x_bar,
                         const Vector& x_star);

/// Per-round drive of the error recursion. Agent blocks carry
/// gamma * A_l^H (A_l A_l^H)^{-1} w_l. The consensus block carries
/// eta * gamma / M * sum_l A_l^H (A_l A_l^H)^{-1} w_l: the server average
/// picks up the noise of the fresh agent iterates within the same round.
struct NoiseDrive {
  Vector w_d;
  std::size_t agents = 0;
  Index dim = 0;
};

NoiseDrive noise_drive(const LinearSystem& sys, std::span<const RowBlock> blocks,
                       const TuningParams& params);

struct ClosedFormState {
  StateVector state;   // evaluated through G^t and (I - G)^{-1}
  Vector partial_sum;  // G^t d(0) + sum_{l<t} G^l w_d, evaluated step by step
  double path_gap = 0.0;   // ||state - partial_sum||_inf
  bool short_circuited = false;  // alpha^t < 1e-250: G^t treated as 0
};

/// Throws SingularIminusG if I - G cannot be factorised (alpha >= 1).
ClosedFormState closed_form_state(const GainMatrix& g, const StateVector& d0,
                                  const NoiseDrive& w_d, std::size_t t, double alpha);

// G^t by repeated squaring.
Matrix matrix_power(const Matrix& g, std::size_t t);

/// Dense solve of (I - G) d = w_d.
StateVector limit_state(const GainMatrix& g, const NoiseDrive& w_d);

struct ErrorPrediction {
  // 1/((1+eta) M) X^{-1} A^H Xi w, the noisy asymptotic error in its stated
  // closed form.
  Vector asymptotic;
  // 1/M X^{-1} A^H Xi w, the fixed point of the actual recursion (consensus
  // block of d(inf)).
  Vector fixed_point;
  RealVector xi_diag;  // Xi_ll = (A_l A_l^H)^{-1}
  double transient_rate = 0.0;
};

ErrorPrediction theorem3_error(const LinearSystem& sys, const TuningParams& params,
                               const Matrix& x);

struct DecayFit {
  double slope = 0.0;          // least-squares slope of log ||eps(t)|| over the tail
  double expected = 0.0;       // ln(alpha)
  std::size_t fitted_points = 0;
  bool skipped = false;        // alpha == 0
  bool underflow = false;      // stopped once ||eps|| < 1e-300
  std::vector<double> norms;   // ||eps(t)||, t = 0..t_max; ends at the first underflowed value
};

// eps(t) = G^t ((I - G) d(0) - w_d); the fit covers t >= t_max / 2.
DecayFit epsilon_decay_check(const GainMatrix& g, const StateVector& d0, const NoiseDrive& w_d,
                             std::size_t t_max, double alpha);

}  // namespace apc
