#pragma once

// Monte-Carlo MSE experiments: MSE(T) = mean over trials of ||x* - xbar(T)||^2,
// optionally swept over M, the target kappa(X) or the noise power.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apc/core_model.hpp"
#include "apc/instance_gen.hpp"

namespace apc {

enum class SweepKind { kNone, kM, kKappa, kNoisePower };

std::string to_string(SweepKind kind);

struct ExperimentConfig {
  Index m = 32;
  Index s = 16;
  std::optional<double> target_kappa;
  double noise_power = 1e-4;
  std::size_t trials = 200;
  std::size_t t_max = 20;
  std::uint64_t seed = 42;
  SweepKind sweep = SweepKind::kNone;
  std::vector<double> sweep_values;
  NoiseDistribution noise = NoiseDistribution::kGaussian;
  bool fixed_truth = false;
  std::size_t workers = 0;  // trial-level parallelism; 0 = hardware concurrency
};

void validate(const ExperimentConfig& cfg);

struct MsePoint {
  std::size_t t = 0;
  double mse = 0.0;
};

struct MseCurve {
  double sweep_value = 0.0;  // 0 when there is no sweep
  std::vector<MsePoint> points;
  double kappa = 0.0;        // mean achieved kappa(X) over trials
  double alpha = 0.0;        // mean alpha over trials
  Index m = 0;
  Index s = 0;
  double noise_power = 0.0;
};

// Trial k of every curve uses derive_seed(seed, k), so curves share their
// random draws (common random numbers) and a noise sweep only rescales w.
std::vector<MseCurve> run_mse_experiment(const ExperimentConfig& cfg);

// First T such that every MSE(T') for T' >= T lies within rel_tol of MSE(t_max).
std::size_t flattening_round(const MseCurve& curve, double rel_tol = 0.05);

struct PredictionComparison {
  std::vector<double> measured_sq;  // ||xbar(T) - x*||^2, T = 0..t_max
  std::vector<double> transient;    // ||(xbar(T) - x*) - ebar(inf)||
  double stated_sq = 0.0;           // ||1/((1+eta)M) X^-1 A^H Xi w||^2
  double limit_sq = 0.0;            // ||ebar(inf)||^2 from (I - G)^{-1} w_d
  double alpha = 0.0;
  std::size_t converged_round = 0;  // first T with alpha^T <= 1e-8
  bool converged_in_range = false;
  // Relative vector gaps at converged_round (absolute when the reference is 0).
  double gap_vs_limit = 0.0;
  double gap_vs_stated = 0.0;
};

/// Needs x* and w. Runs the engine for t_max rounds and compares the measured
/// error with the closed-form asymptotic error and the fixed point of the
/// state recursion.
PredictionComparison predict_vs_measure(const LinearSystem& sys, std::size_t t_max);

}  // namespace apc
