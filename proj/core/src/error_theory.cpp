#include "apc/error_theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apc/error.hpp"

namespace apc {

namespace {

Eigen::PartialPivLU<Matrix> factor_i_minus_g(const GainMatrix& g) {
  const Matrix m = Matrix::Identity(g.size(), g.size()) - g.g;
  Eigen::PartialPivLU<Matrix> lu(m);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularIminusG,
                "I - G is numerically singular (rcond=" + std::to_string(lu.rcond()) + ")");
  }
  return lu;
}

void check_layout(const GainMatrix& g, Index length) {
  if (length != g.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state length " + std::to_string(length) + " differs from G size " +
                    std::to_string(g.size()));
  }
}

}  // namespace

StateVector initial_state(const LinearSystem& sys, std::span<const RowBlock> blocks,
                          std::span<const Projection> projections) {
  if (!sys.x_star || !sys.w_tilde) {
    throw Error(ErrorCode::kMissingGroundTruth, "initial_state needs x* and w");
  }
  if (blocks.size() != projections.size() || blocks.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "one projection per block required");
  }
  const Index s = sys.cols();
  const auto m = blocks.size();
  StateVector st;
  st.agents = m;
  st.dim = s;
  st.d = Vector::Zero(static_cast<Index>(m + 1) * s);
  Vector mean = Vector::Zero(s);
  for (std::size_t l = 0; l < m; ++l) {
    const Vector e = -(projections[l].p * *sys.x_star) +
                     row_pseudoinverse(blocks[l]) * (*sys.w_tilde)(static_cast<Index>(l));
    st.d.segment(static_cast<Index>(l) * s, s) = e;
    mean += e;
  }
  st.d.tail(s) = mean / static_cast<double>(m);
  return st;
}

StateVector stack_errors(std::span<const Vector> agent_solutions, const Vector& x_bar,
                         const Vector& x_star) {
  const Index s = x_star.size();
  StateVector st;
  st.agents = agent_solutions.size();
  st.dim = s;
  st.d.resize(static_cast<Index>(st.agents + 1) * s);
  for (std::size_t l = 0; l < st.agents; ++l) {
    st.d.segment(static_cast<Index>(l) * s, s) = agent_solutions[l] - x_star;
  }
  st.d.tail(s) = x_bar - x_star;
  return st;
}

NoiseDrive noise_drive(const LinearSystem& sys, std::span<const RowBlock> blocks,
                       const TuningParams& params) {
  if (!sys.w_tilde) throw Error(ErrorCode::kMissingGroundTruth, "noise_drive needs w");
  const Index s = sys.cols();
  const auto m = blocks.size();
  NoiseDrive out;
  out.agents = m;
  out.dim = s;
  out.w_d = Vector::Zero(static_cast<Index>(m + 1) * s);
  Vector sum = Vector::Zero(s);
  for (std::size_t l = 0; l < m; ++l) {
    const Vector v = row_pseudoinverse(blocks[l]) * (*sys.w_tilde)(static_cast<Index>(l));
    out.w_d.segment(static_cast<Index>(l) * s, s) = params.gamma * v;
    sum += v;
  }
  out.w_d.tail(s) = (params.eta * params.gamma / static_cast<double>(m)) * sum;
  return out;
}

Matrix matrix_power(const Matrix& g, std::size_t t) {
  Matrix result = Matrix::Identity(g.rows(), g.cols());
  Matrix base = g;
  while (t > 0) {
    if (t & 1U) result = result * base;
    t >>= 1U;
    if (t > 0) base = base * base;
  }
  return result;
}

ClosedFormState closed_form_state(const GainMatrix& g, const StateVector& d0,
                                  const NoiseDrive& w_d, std::size_t t, double alpha) {
  check_layout(g, d0.d.size());
  check_layout(g, w_d.w_d.size());
  const auto lu = factor_i_minus_g(g);
  const Vector limit = lu.solve(w_d.w_d);

  ClosedFormState out;
  out.state.agents = d0.agents;
  out.state.dim = d0.dim;
  const bool negligible =
      alpha > 0.0 && static_cast<double>(t) * std::log(alpha) < std::log(1e-250);
  if (negligible) {
    out.state.d = limit;
    out.short_circuited = true;
  } else {
    const Matrix gt = matrix_power(g.g, t);
    out.state.d = gt * d0.d + limit - gt * limit;
  }

  Vector zero_input = d0.d;
  Vector zero_state = Vector::Zero(d0.d.size());
  for (std::size_t k = 0; k < t; ++k) {
    zero_input = g.g * zero_input;
    zero_state = g.g * zero_state + w_d.w_d;
  }
  out.partial_sum = zero_input + zero_state;
  out.path_gap = (out.state.d - out.partial_sum).cwiseAbs().maxCoeff();
  return out;
}

StateVector limit_state(const GainMatrix& g, const NoiseDrive& w_d) {
  check_layout(g, w_d.w_d.size());
  const auto lu = factor_i_minus_g(g);
  StateVector out;
  out.agents = w_d.agents;
  out.dim = w_d.dim;
  out.d = lu.solve(w_d.w_d);
  const Matrix m = Matrix::Identity(g.size(), g.size()) - g.g;
  const double residual = (m * out.d - w_d.w_d).norm();
  if (residual > 1e-10 * w_d.w_d.norm() + 1e-300) {
    throw Error(ErrorCode::kSingularIminusG,
                "limit solve residual " + std::to_string(residual) + " too large");
  }
  return out;
}

ErrorPrediction theorem3_error(const LinearSystem& sys, const TuningParams& params,
                               const Matrix& x) {
  if (!sys.w_tilde) throw Error(ErrorCode::kMissingGroundTruth, "theorem3_error needs w");
  const Index m = sys.rows();
  ErrorPrediction out;
  out.transient_rate = params.alpha;
  out.xi_diag.resize(m);
  for (Index l = 0; l < m; ++l) {
    const double n2 = sys.a.row(l).squaredNorm();
    if (n2 == 0.0) {
      throw Error(ErrorCode::kZeroRow, "row " + std::to_string(l + 1) + " is zero",
                  static_cast<std::size_t>(l + 1));
    }
    out.xi_diag(l) = 1.0 / n2;
  }
  const Vector weighted = out.xi_diag.cast<Scalar>().cwiseProduct(*sys.w_tilde);
  const Vector rhs = sys.a.adjoint() * weighted;

  Eigen::LDLT<Matrix> chol(x);
  if (chol.info() != Eigen::Success || !chol.isPositive()) {
    throw Error(ErrorCode::kRankDeficient, "X is not positive definite");
  }
  const Vector x_inv_rhs = chol.solve(rhs);
  if (!x_inv_rhs.allFinite()) throw Error(ErrorCode::kRankDeficient, "X solve failed");
  out.fixed_point = x_inv_rhs / static_cast<double>(m);
  out.asymptotic = out.fixed_point / (1.0 + params.eta);
  return out;
}

DecayFit epsilon_decay_check(const GainMatrix& g, const StateVector& d0, const NoiseDrive& w_d,
                             std::size_t t_max, double alpha) {
  check_layout(g, d0.d.size());
  check_layout(g, w_d.w_d.size());
  DecayFit fit;
  fit.expected = alpha > 0.0 ? std::log(alpha) : -HUGE_VAL;

  Vector eps = d0.d - g.g * d0.d - w_d.w_d;
  fit.norms.push_back(eps.norm());
  for (std::size_t t = 1; t <= t_max; ++t) {
    eps = g.g * eps;
    const double n = eps.norm();
    fit.norms.push_back(n);
    if (n < 1e-300) {
      fit.underflow = true;
      break;
    }
  }
  if (!(alpha > 0.0)) {
    fit.skipped = true;
    return fit;
  }

  // Ordinary least squares of log-norm against t over the tail.
  if (fit.norms.size() < (fit.underflow ? 3U : 2U)) return fit;
  const std::size_t last = fit.norms.size() - (fit.underflow ? 2 : 1);
  const std::size_t first = fit.underflow ? last / 2 : std::min(t_max / 2, last);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t t = first; t <= last; ++t) {
    const double xt = static_cast<double>(t);
    const double yt = std::log(fit.norms[t]);
    sx += xt;
    sy += yt;
    sxx += xt * xt;
    sxy += xt * yt;
    ++n;
  }
  fit.fitted_points = n;
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  fit.slope = n >= 2 && denom != 0.0 ? (static_cast<double>(n) * sxy - sx * sy) / denom : 0.0;
  return fit;
}

}  // namespace apc
