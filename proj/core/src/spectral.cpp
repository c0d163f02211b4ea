#include "apc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "apc/error.hpp"

namespace apc {

namespace {

constexpr double kSeparation = 1e-6;

// Groups values whose chains of pairwise distances stay within tol, in order
// of first appearance.
std::vector<std::vector<Scalar>> single_linkage(const std::vector<Scalar>& values, double tol) {
  std::vector<std::size_t> parent(values.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (std::abs(values[i] - values[j]) <= tol) parent[root(j)] = root(i);
    }
  }
  std::vector<std::vector<Scalar>> clusters;
  std::vector<std::size_t> slot(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t r = root(i);
    if (slot[r] == values.size()) {
      slot[r] = clusters.size();
      clusters.emplace_back();
    }
    clusters[slot[r]].push_back(values[i]);
  }
  return clusters;
}

Scalar mean_of(const std::vector<Scalar>& values) {
  Scalar sum = 0.0;
  for (const Scalar& v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

GainMatrix build_gain_matrix(std::span<const Projection> projections, const Matrix& x,
                             const TuningParams& params) {
  if (projections.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "gain matrix needs at least one agent");
  }
  const Index s = x.rows();
  if (x.cols() != s) throw Error(ErrorCode::kDimensionMismatch, "X must be square");
  for (const Projection& p : projections) {
    if (p.dim() != s || p.p.cols() != s) {
      throw Error(ErrorCode::kDimensionMismatch, "projection size differs from X");
    }
  }
  const auto m = static_cast<Index>(projections.size());
  const double gamma = params.gamma;
  const double eta = params.eta;

  GainMatrix out;
  out.gamma = gamma;
  out.eta = eta;
  out.agents = projections.size();
  out.dim = s;
  out.b = -eta * gamma * x + (1.0 - eta + eta * gamma) * Matrix::Identity(s, s);

  const Index n = (m + 1) * s;
  out.g = Matrix::Zero(n, n);
  out.g.topLeftCorner(m * s, m * s).diagonal().setConstant(1.0 - gamma);
  const double lower = eta * (1.0 - gamma) / static_cast<double>(m);
  for (Index l = 0; l < m; ++l) {
    out.g.block(l * s, m * s, s, s) = gamma * projections[static_cast<std::size_t>(l)].p;
    out.g.block(m * s, l * s, s, s).diagonal().setConstant(lower);
  }
  out.g.bottomRightCorner(s, s) = out.b;
  return out;
}

std::vector<PredictedPair> predicted_eigenvalues(const RealVector& thetas,
                                                 const TuningParams& params) {
  if (thetas.size() == 0) return {};
  const double theta_max = thetas.maxCoeff();
  const double theta_min = thetas.minCoeff();
  const double root_sum = std::sqrt(theta_max) + std::sqrt(theta_min);
  const double denom = root_sum * root_sum;
  const double g = params.gamma;
  const double e = params.eta;
  const double c = (g - 1.0) * (e - 1.0);

  std::vector<PredictedPair> out;
  out.reserve(static_cast<std::size_t>(thetas.size()));
  for (Index i = 0; i < thetas.size(); ++i) {
    const double th = thetas(i);
    PredictedPair p;
    p.i = static_cast<std::size_t>(i);
    p.theta = th;

    const double centre = (theta_max + theta_min - 2.0 * th) / denom;
    const Scalar spread =
        2.0 * std::sqrt(Scalar((th - theta_max) * (th - theta_min), 0.0)) / denom;
    p.plus = centre + spread;
    p.minus = centre - spread;

    const double b = -e * g * (1.0 - th) + g + e - 2.0;
    const Scalar disc = std::sqrt(Scalar(b * b - 4.0 * c, 0.0));
    const Scalar r1 = (-b + disc) / 2.0;
    const Scalar r2 = (-b - disc) / 2.0;
    // Pair the quadratic roots with the closed-form branches.
    if (std::abs(r1 - p.plus) + std::abs(r2 - p.minus) <=
        std::abs(r2 - p.plus) + std::abs(r1 - p.minus)) {
      p.quad_plus = r1;
      p.quad_minus = r2;
    } else {
      p.quad_plus = r2;
      p.quad_minus = r1;
    }
    p.agreement = std::max(std::abs(p.plus - p.quad_plus), std::abs(p.minus - p.quad_minus));
    auto q = [&](Scalar xi) { return xi * xi + b * xi + c; };
    p.quadratic_residual = std::max(std::abs(q(p.plus)), std::abs(q(p.minus)));
    out.push_back(p);
  }
  return out;
}

std::vector<Scalar> flatten(std::span<const PredictedPair> pairs) {
  std::vector<Scalar> out;
  out.reserve(2 * pairs.size());
  for (const PredictedPair& p : pairs) {
    out.push_back(p.plus);
    out.push_back(p.minus);
  }
  return out;
}

std::vector<EigenvalueMatch> match_multisets(std::span<const Scalar> predicted,
                                             std::span<const Scalar> measured) {
  if (predicted.size() != measured.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "multiset sizes differ: " + std::to_string(predicted.size()) + " predicted vs " +
                    std::to_string(measured.size()) + " measured");
  }
  const std::size_t n = predicted.size();
  std::vector<bool> pred_used(n, false);
  std::vector<bool> meas_used(n, false);
  std::vector<EigenvalueMatch> out;
  out.reserve(n);

  auto pass = [&](double tol) {
    for (std::size_t p = 0; p < n; ++p) {
      if (pred_used[p]) continue;
      std::size_t best = n;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < n; ++q) {
        if (meas_used[q]) continue;
        const double d = std::abs(predicted[p] - measured[q]);
        if (d < best_d) {
          best_d = d;
          best = q;
        }
      }
      if (best < n && best_d <= tol) {
        pred_used[p] = true;
        meas_used[best] = true;
        out.push_back({predicted[p], measured[best], best_d});
      }
    }
  };
  for (double tol = 1e-10; tol <= 1.0000001e-6; tol *= 10.0) pass(tol);
  pass(std::numeric_limits<double>::infinity());
  return out;
}

SpectralReport verify_spectrum(const GainMatrix& g, const RealVector& thetas,
                               const TuningParams& params) {
  SpectralReport rep;
  rep.alpha = params.alpha;
  rep.repeated_value = Scalar(1.0 - params.gamma, 0.0);
  const auto m = g.agents;
  const auto s = static_cast<std::size_t>(g.dim);
  rep.repeated_multiplicity = (m - 1) * s;
  rep.predicted_xi = predicted_eigenvalues(thetas, params);

  Eigen::ComplexEigenSolver<Matrix> solver(g.g, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigensolveFailed, "dense eigensolve of G did not converge");
  }
  const auto& ev = solver.eigenvalues();
  rep.measured.assign(ev.data(), ev.data() + ev.size());
  for (const Scalar& v : rep.measured) rep.rho_raw = std::max(rep.rho_raw, std::abs(v));
  // A defective eigenvalue splits by O(sqrt(eps)) under rounding; the cluster
  // mean is still accurate to O(eps).
  for (const auto& cl : single_linkage(rep.measured, kSeparation)) {
    rep.rho_measured = std::max(rep.rho_measured, std::abs(mean_of(cl)));
  }

  std::vector<Scalar> predicted(rep.repeated_multiplicity, rep.repeated_value);
  for (const Scalar& xi : flatten(rep.predicted_xi)) predicted.push_back(xi);
  rep.matches = match_multisets(predicted, rep.measured);
  for (const EigenvalueMatch& mt : rep.matches) {
    rep.match_residual = std::max(rep.match_residual, mt.distance);
  }
  for (const PredictedPair& p : rep.predicted_xi) {
    rep.max_modulus_deviation =
        std::max({rep.max_modulus_deviation, std::abs(std::abs(p.plus) - params.alpha),
                  std::abs(std::abs(p.minus) - params.alpha)});
  }
  return rep;
}

EigenvectorCheck verify_eigenvector_formula(const GainMatrix& g,
                                            const ConsensusSpectrum& spectrum,
                                            std::span<const Projection> projections,
                                            const TuningParams& params) {
  if (projections.size() != g.agents) {
    throw Error(ErrorCode::kDimensionMismatch, "projection count differs from G");
  }
  const Index s = g.dim;
  const auto m = static_cast<Index>(g.agents);
  const double gamma = params.gamma;
  EigenvectorCheck out;
  const auto pairs = predicted_eigenvalues(spectrum.thetas, params);
  for (const PredictedPair& p : pairs) {
    const Vector vi = spectrum.eigvecs.col(static_cast<Index>(p.i));
    for (int sign : {+1, -1}) {
      const Scalar xi = sign > 0 ? p.plus : p.minus;
      const Scalar denom = 1.0 - gamma - xi;
      if (std::abs(denom) <= 1e-12) {
        out.degenerate.push_back({p.i, sign, xi});
        continue;
      }
      Vector v(g.size());
      const Scalar coeff = -gamma / denom;
      for (Index l = 0; l < m; ++l) {
        v.segment(l * s, s) = coeff * (projections[static_cast<std::size_t>(l)].p * vi);
      }
      v.tail(s) = vi;
      const Vector r = g.g * v - xi * v;
      out.max_residual = std::max(out.max_residual, r.norm() / v.norm());
      ++out.checked;
    }
  }
  return out;
}

std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const RealVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  std::size_t rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  return rank;
}

MultiplicityReport verify_multiplicity_structure(const GainMatrix& g, const RealVector& thetas,
                                                 const TuningParams& params) {
  const Index n = g.size();
  const auto s = static_cast<std::size_t>(g.dim);
  MultiplicityReport rep;
  rep.rank_bound = 2 * s;

  const Scalar repeated(1.0 - params.gamma, 0.0);
  const Matrix eye = Matrix::Identity(n, n);
  rep.rank_shifted = numerical_rank(g.g - repeated * eye);
  rep.repeated_geometric = static_cast<std::size_t>(n) - rep.rank_shifted;

  const auto clusters = single_linkage(flatten(predicted_eigenvalues(thetas, params)), kSeparation);

  for (const auto& cl : clusters) {
    const Scalar centre = mean_of(cl);
    if (std::abs(centre - repeated) <= kSeparation) {
      rep.ill_separated.push_back(centre);
      continue;
    }
    ClusterMultiplicity cm;
    cm.value = centre;
    cm.algebraic = cl.size();
    cm.geometric = static_cast<std::size_t>(n) - numerical_rank(g.g - centre * eye);
    rep.xi_clusters.push_back(cm);
  }
  return rep;
}

double jordan_decay_constant(const GainMatrix& g, double alpha, std::size_t t_max,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector u(g.size());
  for (Index i = 0; i < u.size(); ++i) u(i) = Scalar(nd(rng), nd(rng));
  const double u_norm = u.norm();
  double worst = 0.0;
  Vector v = u;
  for (std::size_t t = 0; t <= t_max; ++t) {
    if (t > 0) v = g.g * v;
    const double scale =
        static_cast<double>(t + 1) * std::pow(alpha, static_cast<double>(t > 0 ? t - 1 : 0));
    const double ratio = v.norm() / u_norm;
    if (scale > 1e-300) {
      worst = std::max(worst, ratio / scale);
    } else if (ratio > 1e-12) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return worst;
}

double min_singular_value_of_i_minus_g(const GainMatrix& g) {
  const Matrix m = Matrix::Identity(g.size(), g.size()) - g.g;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace apc
