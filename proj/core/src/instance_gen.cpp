#include "apc/instance_gen.hpp"

#include <cmath>
#include <string>

#include "apc/error.hpp"

namespace apc {

namespace {

RealMatrix gaussian(Index m, Index s, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RealMatrix g(m, s);
  // Column-major fill order is part of the reproducibility contract.
  for (Index c = 0; c < s; ++c) {
    for (Index r = 0; r < m; ++r) g(r, c) = nd(rng);
  }
  return g;
}

RealVector spectrum_of_x(const RealMatrix& a) {
  RealMatrix u = a;
  for (Index r = 0; r < u.rows(); ++r) u.row(r).normalize();
  const RealMatrix x = u.transpose() * u / static_cast<double>(u.rows());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(x, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double measured_kappa(const RealMatrix& a) {
  const RealVector th = spectrum_of_x(a);
  if (!(th(0) > 0.0)) return HUGE_VAL;
  return th(th.size() - 1) / th(0);
}

RealMatrix tight_frame(Index m, Index s, std::mt19937_64& rng) {
  const RealMatrix g = gaussian(m, s, rng);
  Eigen::HouseholderQR<RealMatrix> qr(g);
  RealMatrix f = qr.householderQ() * RealMatrix::Identity(m, s);
  if (m == s) return f;

  // Alternate between unit rows and F^T F proportional to I.
  const double scale = std::sqrt(static_cast<double>(m) / static_cast<double>(s));
  for (int it = 0; it < 2000; ++it) {
    for (Index r = 0; r < m; ++r) f.row(r).normalize();
    if (measured_kappa(f) - 1.0 < 1e-13) break;
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(f.transpose() * f);
    const RealMatrix inv_sqrt = es.eigenvectors() *
                                es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose();
    f = scale * f * inv_sqrt;
  }
  for (Index r = 0; r < m; ++r) f.row(r).normalize();
  return f;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

LinearSystem generate_instance(const InstanceSpec& spec, std::mt19937_64& rng) {
  const Index m = spec.m;
  const Index s = spec.s;
  if (s < 1 || m < s) {
    throw Error(ErrorCode::kInvalidArgument, "need m >= s >= 1");
  }
  if (!(spec.noise_power >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise power must be >= 0");
  }

  RealMatrix a;
  if (!spec.target_kappa) {
    a = gaussian(m, s, rng);
  } else {
    const double target = *spec.target_kappa;
    if (!(target >= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "target kappa must be >= 1");
    }
    if (s < 2 && target > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "kappa targeting needs s >= 2");
    }
    const RealMatrix frame = tight_frame(m, s, rng);
    RealMatrix end = gaussian(m, s, rng);
    const double k0 = measured_kappa(frame);
    if (std::abs(k0 - target) <= 0.02 * target) {
      a = frame;
    } else {
      double k1 = measured_kappa(end);
      for (int halvings = 0; k1 < target && halvings < 60; ++halvings) {
        end.col(s - 1) *= 0.5;
        k1 = measured_kappa(end);
      }
      if (k0 > target || k1 < target) {
        throw Error(ErrorCode::kKappaUnreachable,
                    "target kappa " + std::to_string(target) + " outside reachable range [" +
                        std::to_string(k0) + ", " + std::to_string(k1) + "]");
      }
      double lo = 0.0;
      double hi = 1.0;
      double best_gap = HUGE_VAL;
      int it = 0;
      for (; it < 200; ++it) {
        const double beta = 0.5 * (lo + hi);
        RealMatrix cand = (1.0 - beta) * frame + beta * end;
        const double k = measured_kappa(cand);
        const double gap = std::abs(k / target - 1.0);
        if (gap < best_gap) {
          best_gap = gap;
          a = std::move(cand);
        }
        if (gap <= 0.005) break;
        (k < target ? lo : hi) = beta;
      }
      if (best_gap > 0.02) {
        throw Error(ErrorCode::kKappaUnreachable,
                    "bisection stalled " + std::to_string(best_gap * 100.0) +
                        "% away from target kappa " + std::to_string(target));
      }
    }
  }

  RealVector x_star;
  if (spec.x_star) {
    if (spec.x_star->size() != s) {
      throw Error(ErrorCode::kDimensionMismatch, "fixed x* has wrong length");
    }
    x_star = *spec.x_star;
  } else {
    std::normal_distribution<double> nd;
    x_star.resize(s);
    for (Index i = 0; i < s; ++i) x_star(i) = nd(rng);
  }

  RealVector w = RealVector::Zero(m);
  if (spec.noise_power > 0.0) {
    if (spec.noise == NoiseDistribution::kGaussian) {
      std::normal_distribution<double> nd;
      for (Index i = 0; i < m; ++i) w(i) = nd(rng);
      w *= std::sqrt(spec.noise_power);
    } else {
      std::uniform_real_distribution<double> ud(-1.0, 1.0);
      for (Index i = 0; i < m; ++i) w(i) = ud(rng);
      w *= std::sqrt(3.0 * spec.noise_power);
    }
  }
  const RealVector y = a * x_star + w;
  return LinearSystem::from_real(a, y, x_star, w);
}

}  // namespace apc
