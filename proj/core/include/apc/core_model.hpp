#pragma once

// Problem representation for the federated solver: the linear system, its
// row-wise split across agents, per-row nullspace projectors and the
// consensus matrix X whose spectrum drives the tuning.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "apc/types.hpp"

namespace apc {

/// y = A x* + w. Ground truth and noise are optional; they are only known in
/// analysis and benchmark mode.
struct LinearSystem {
  Matrix a;
  Vector y;
  std::optional<Vector> x_star;
  std::optional<Vector> w_tilde;

  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }

  static LinearSystem from_real(const RealMatrix& a, const RealVector& y,
                                std::optional<RealVector> x_star = std::nullopt,
                                std::optional<RealVector> w_tilde = std::nullopt);
};

// Shape checks, M >= s >= 1, nonzero rows, and the y = A x* + w consistency
// bound when both x* and w are present. Full column rank is checked by
// consensus_matrix since it needs the spectrum of X.
void validate(const LinearSystem& sys);

/// One agent's private equation A_l x = y_l. `index` is 1-based.
struct RowBlock {
  std::size_t index = 0;
  RowVector a_row;
  Scalar y = {};

  double squared_norm() const { return a_row.squaredNorm(); }
};

std::vector<RowBlock> partition_rows(const LinearSystem& sys);

/// P = I - A_l^H (A_l A_l^H)^{-1} A_l, the projector onto the nullspace of A_l.
struct Projection {
  Matrix p;

  Index dim() const { return p.rows(); }
};

Projection projection_complement(const RowBlock& block);

// A_l^H (A_l A_l^H)^{-1}: the minimum-norm right inverse of a single row.
Vector row_pseudoinverse(const RowBlock& block);

struct ProjectionResiduals {
  double hermitian = 0.0;    // ||P - P^H||_F
  double idempotent = 0.0;   // ||P^2 - P||_F
  double annihilation = 0.0; // ||A_l P||_2 / ||A_l||_2
};

ProjectionResiduals projection_residuals(const Projection& proj,
                                         const RowBlock& block);

inline constexpr double kRankTolFactor = 1e-10;

struct ConsensusSpectrum {
  Matrix x;
  RealVector thetas;  // descending: theta_1 >= ... >= theta_s
  double theta_min = 0.0;
  double theta_max = 0.0;
  Matrix eigvecs;     // column i pairs with thetas(i)

  double kappa() const { return theta_max / theta_min; }
};

/// Builds X = (1/M) sum_l A_l^H (A_l A_l^H)^{-1} A_l and its Hermitian
/// eigendecomposition. Throws RankDeficient when theta_min <= 1e-10 theta_max.
ConsensusSpectrum consensus_matrix(std::span<const RowBlock> blocks);
ConsensusSpectrum consensus_matrix(const LinearSystem& sys);

// (1/M) sum_l P_l, which equals I - X.
Matrix mean_projection(std::span<const Projection> projections);

std::vector<Projection> projections_for(std::span<const RowBlock> blocks);

}  // namespace apc
