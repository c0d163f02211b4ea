#include "apc/core_model.hpp"

#include <cmath>
#include <string>

#include "apc/error.hpp"

namespace apc {

LinearSystem LinearSystem::from_real(const RealMatrix& a, const RealVector& y,
                                     std::optional<RealVector> x_star,
                                     std::optional<RealVector> w_tilde) {
  LinearSystem sys;
  sys.a = a.cast<Scalar>();
  sys.y = y.cast<Scalar>();
  if (x_star) sys.x_star = x_star->cast<Scalar>();
  if (w_tilde) sys.w_tilde = w_tilde->cast<Scalar>();
  return sys;
}

void validate(const LinearSystem& sys) {
  const Index m = sys.rows();
  const Index s = sys.cols();
  if (s < 1 || m < s) {
    throw Error(ErrorCode::kInvalidArgument,
                "need M >= s >= 1, got M=" + std::to_string(m) +
                    " s=" + std::to_string(s));
  }
  if (sys.y.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "y must have length M");
  }
  if (sys.x_star && sys.x_star->size() != s) {
    throw Error(ErrorCode::kDimensionMismatch, "x_star must have length s");
  }
  if (sys.w_tilde && sys.w_tilde->size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "w_tilde must have length M");
  }
  for (Index l = 0; l < m; ++l) {
    if (sys.a.row(l).squaredNorm() == 0.0) {
      throw Error(ErrorCode::kZeroRow,
                  "row " + std::to_string(l + 1) + " of A is zero",
                  static_cast<std::size_t>(l + 1));
    }
  }
  if (!sys.a.allFinite() || !sys.y.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "A and y must be finite");
  }
  if (sys.x_star && sys.w_tilde) {
    const double gap = (sys.y - sys.a * *sys.x_star - *sys.w_tilde).norm();
    if (gap > 1e-12 * (1.0 + sys.y.norm())) {
      throw Error(ErrorCode::kInvalidArgument,
                  "y differs from A x* + w by " + std::to_string(gap));
    }
  }
}

std::vector<RowBlock> partition_rows(const LinearSystem& sys) {
  if (sys.y.size() != sys.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "y must have length M");
  }
  std::vector<RowBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(sys.rows()));
  for (Index l = 0; l < sys.rows(); ++l) {
    RowBlock block{static_cast<std::size_t>(l + 1), sys.a.row(l), sys.y(l)};
    if (block.squared_norm() == 0.0) {
      throw Error(ErrorCode::kZeroRow,
                  "row " + std::to_string(block.index) + " of A is zero",
                  block.index);
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

namespace {

void require_nonzero(const RowBlock& block) {
  if (!(block.squared_norm() > 0.0)) {
    throw Error(ErrorCode::kZeroRow,
                "row " + std::to_string(block.index) + " is zero", block.index);
  }
}

}  // namespace

Vector row_pseudoinverse(const RowBlock& block) {
  require_nonzero(block);
  return block.a_row.adjoint() / block.squared_norm();
}

Projection projection_complement(const RowBlock& block) {
  require_nonzero(block);
  const Index s = block.a_row.size();
  Matrix p = Matrix::Identity(s, s) -
             block.a_row.adjoint() * block.a_row / block.squared_norm();
  return Projection{std::move(p)};
}

ProjectionResiduals projection_residuals(const Projection& proj,
                                         const RowBlock& block) {
  ProjectionResiduals r;
  r.hermitian = (proj.p - proj.p.adjoint()).norm();
  r.idempotent = (proj.p * proj.p - proj.p).norm();
  r.annihilation = (block.a_row * proj.p).norm() / block.a_row.norm();
  return r;
}

ConsensusSpectrum consensus_matrix(std::span<const RowBlock> blocks) {
  if (blocks.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one row block");
  }
  const Index s = blocks.front().a_row.size();
  Matrix x = Matrix::Zero(s, s);
  for (const RowBlock& block : blocks) {
    if (block.a_row.size() != s) {
      throw Error(ErrorCode::kDimensionMismatch, "row blocks differ in length");
    }
    require_nonzero(block);
    x.noalias() += block.a_row.adjoint() * block.a_row / block.squared_norm();
  }
  x /= static_cast<double>(blocks.size());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(x);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolveFailed, "Hermitian eigensolve of X failed");
  }

  ConsensusSpectrum spec;
  spec.x = std::move(x);
  // Eigen returns ascending order.
  spec.thetas = solver.eigenvalues().reverse();
  spec.eigvecs = solver.eigenvectors().rowwise().reverse();
  spec.theta_max = spec.thetas(0);
  spec.theta_min = spec.thetas(s - 1);

  if (spec.theta_min <= kRankTolFactor * spec.theta_max) {
    throw Error(ErrorCode::kRankDeficient,
                "X is singular (theta_min=" + std::to_string(spec.theta_min) +
                    "); rows do not span C^s");
  }
  return spec;
}

ConsensusSpectrum consensus_matrix(const LinearSystem& sys) {
  const auto blocks = partition_rows(sys);
  return consensus_matrix(blocks);
}

Matrix mean_projection(std::span<const Projection> projections) {
  if (projections.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one projection");
  }
  Matrix sum = Matrix::Zero(projections.front().dim(), projections.front().dim());
  for (const Projection& proj : projections) sum += proj.p;
  return sum / static_cast<double>(projections.size());
}

std::vector<Projection> projections_for(std::span<const RowBlock> blocks) {
  std::vector<Projection> out;
  out.reserve(blocks.size());
  for (const RowBlock& block : blocks) out.push_back(projection_complement(block));
  return out;
}

}  // namespace apc
