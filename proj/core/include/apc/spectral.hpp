#pragma once

// The stacked error d(t) = [e_1; ...; e_M; ebar] evolves as d(t+1) = G d(t) + w_d
// with the gain matrix
//
//        [ (1-gamma) I_Ms                 gamma [P_1; ...; P_M] ]
//   G =  [ eta(1-gamma)/M [I_s ... I_s]   B                     ]
//
//   B = -eta gamma X + (1 - eta + eta gamma) I_s.
//
// This module assembles G and checks its spectrum against the closed-form
// prediction: (M-1)s copies of 1-gamma plus the 2s roots xi_{i,+-} of
//   xi^2 + (-eta gamma (1-theta_i) + gamma + eta - 2) xi + (gamma-1)(eta-1) = 0.

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "apc/core_model.hpp"
#include "apc/tuning.hpp"

namespace apc {

struct GainMatrix {
  Matrix g;
  Matrix b;
  double gamma = 0.0;
  double eta = 0.0;
  std::size_t agents = 0;
  Index dim = 0;

  Index size() const { return g.rows(); }
};

GainMatrix build_gain_matrix(std::span<const Projection> projections, const Matrix& x,
                             const TuningParams& params);

struct PredictedPair {
  std::size_t i = 0;  // 0-based index into thetas (descending)
  double theta = 0.0;
  Scalar plus;        // closed form, + branch
  Scalar minus;       // closed form, - branch
  Scalar quad_plus;   // quadratic formula roots, paired to the closed form
  Scalar quad_minus;
  double agreement = 0.0;          // max |closed - quadratic| over the pair
  double quadratic_residual = 0.0; // max |q(xi)| over the pair (closed form)
};

std::vector<PredictedPair> predicted_eigenvalues(const RealVector& thetas,
                                                 const TuningParams& params);

// Flattens the pairs to the 2s predicted values, + before - for each i.
std::vector<Scalar> flatten(std::span<const PredictedPair> pairs);

struct EigenvalueMatch {
  Scalar predicted;
  Scalar measured;
  double distance = 0.0;
};

// Greedy nearest-neighbour multiset matching. Tolerances escalate
// 1e-10, 1e-9, ..., 1e-6; whatever is still unmatched is paired greedily at
// any distance so that the residual is reported rather than hidden.
std::vector<EigenvalueMatch> match_multisets(std::span<const Scalar> predicted,
                                             std::span<const Scalar> measured);

struct SpectralReport {
  Scalar repeated_value;               // 1 - gamma
  std::size_t repeated_multiplicity = 0;
  std::vector<PredictedPair> predicted_xi;
  std::vector<Scalar> measured;
  std::vector<EigenvalueMatch> matches;
  double rho_measured = 0.0;           // max |mean| over clusters of measured values within 1e-6
  double rho_raw = 0.0;                // max |lambda| over the raw eigenvalues
  double alpha = 0.0;
  double match_residual = 0.0;
  double max_modulus_deviation = 0.0;  // max_i,+- ||xi| - alpha|
};

/// Dense eigensolve of G; throws EigensolveFailed if the QR iteration fails.
SpectralReport verify_spectrum(const GainMatrix& g, const RealVector& thetas,
                               const TuningParams& params);

struct SkippedPair {
  std::size_t i = 0;
  int sign = +1;
  Scalar xi;
};

struct EigenvectorCheck {
  double max_residual = 0.0;  // max ||(G - xi I) v|| / ||v||
  std::size_t checked = 0;
  std::vector<SkippedPair> degenerate;  // |1 - gamma - xi| <= 1e-12
};

EigenvectorCheck verify_eigenvector_formula(const GainMatrix& g,
                                            const ConsensusSpectrum& spectrum,
                                            std::span<const Projection> projections,
                                            const TuningParams& params);

// Numerical rank from singular values above 1e-8 * sigma_max.
std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-8);

struct ClusterMultiplicity {
  Scalar value;
  std::size_t algebraic = 0;  // predicted count in the cluster
  std::size_t geometric = 0;  // dim ker(G - value I), measured
};

struct MultiplicityReport {
  std::size_t rank_shifted = 0;    // rank(G - (1-gamma) I)
  std::size_t rank_bound = 0;      // 2s
  std::size_t repeated_geometric = 0;
  std::vector<ClusterMultiplicity> xi_clusters;  // well separated only
  std::vector<Scalar> ill_separated;             // skipped, not failed
};

MultiplicityReport verify_multiplicity_structure(const GainMatrix& g, const RealVector& thetas,
                                                 const TuningParams& params);

// max over t <= t_max of ||G^t u|| / ((t+1) alpha^max(t-1,0) ||u||) for a
// random u; bounded by a modest constant when every Jordan block is at most 2x2.
double jordan_decay_constant(const GainMatrix& g, double alpha, std::size_t t_max,
                             std::mt19937_64& rng);

double min_singular_value_of_i_minus_g(const GainMatrix& g);

}  // namespace apc
