#include "apc/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "apc/engine.hpp"
#include "apc/error.hpp"
#include "apc/error_theory.hpp"
#include "apc/spectral.hpp"

namespace apc {

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kNone: return "none";
    case SweepKind::kM: return "m";
    case SweepKind::kKappa: return "kappa";
    case SweepKind::kNoisePower: return "noise";
  }
  return "none";
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (cfg.s < 1) fail("s must be >= 1");
  if (cfg.trials < 1) fail("trials must be >= 1");
  if (!(cfg.noise_power >= 0.0)) fail("noise power must be >= 0");
  if (cfg.target_kappa && !(*cfg.target_kappa >= 1.0)) fail("kappa must be >= 1");
  if (cfg.sweep == SweepKind::kNone) {
    if (cfg.m < cfg.s) fail("need m >= s");
    return;
  }
  if (cfg.sweep_values.empty()) fail("sweep needs at least one value");
  for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
    const double v = cfg.sweep_values[i];
    if (!(v > 0.0) || !std::isfinite(v)) fail("sweep values must be positive");
    if (i > 0 && !(v > cfg.sweep_values[i - 1])) fail("sweep values must be strictly increasing");
    if (cfg.sweep == SweepKind::kM) {
      if (v != std::floor(v)) fail("m sweep values must be integers");
      if (static_cast<Index>(v) < cfg.s) fail("every swept m must be >= s");
    }
    if (cfg.sweep == SweepKind::kKappa && v < 1.0) fail("kappa sweep values must be >= 1");
  }
  if (cfg.sweep != SweepKind::kM && cfg.m < cfg.s) fail("need m >= s");
}

namespace {

struct TrialResult {
  std::vector<double> sq_error;
  double kappa = 0.0;
  double alpha = 0.0;
};

TrialResult run_trial(const InstanceSpec& spec, std::size_t t_max, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const LinearSystem sys = generate_instance(spec, rng);
  RunOptions opt;
  opt.rounds = t_max;
  const RunRecord rec = run_apc(sys, opt);
  TrialResult out;
  out.sq_error.reserve(rec.per_round_error.size());
  for (double e : rec.per_round_error) out.sq_error.push_back(e * e);
  out.kappa = rec.params.kappa;
  out.alpha = rec.params.alpha;
  return out;
}

MseCurve run_curve(const InstanceSpec& spec, const ExperimentConfig& cfg, double sweep_value) {
  std::vector<TrialResult> results(cfg.trials);
  std::vector<std::exception_ptr> errors(cfg.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cfg.trials; k = next++) {
      try {
        results[k] = run_trial(spec, cfg.t_max, derive_seed(cfg.seed, k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::size_t n = cfg.workers ? cfg.workers : std::thread::hardware_concurrency();
  n = std::max<std::size_t>(1, std::min(n, cfg.trials));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Reduction in trial order keeps the result independent of scheduling.
  MseCurve curve;
  curve.sweep_value = sweep_value;
  curve.m = spec.m;
  curve.s = spec.s;
  curve.noise_power = spec.noise_power;
  curve.points.resize(cfg.t_max + 1);
  for (std::size_t t = 0; t <= cfg.t_max; ++t) {
    double sum = 0.0;
    for (const TrialResult& r : results) sum += r.sq_error[t];
    curve.points[t] = {t, sum / static_cast<double>(cfg.trials)};
  }
  for (const TrialResult& r : results) {
    curve.kappa += r.kappa;
    curve.alpha += r.alpha;
  }
  curve.kappa /= static_cast<double>(cfg.trials);
  curve.alpha /= static_cast<double>(cfg.trials);
  return curve;
}

}  // namespace

std::vector<MseCurve> run_mse_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<double> values = cfg.sweep == SweepKind::kNone ? std::vector<double>{0.0}
                                                             : cfg.sweep_values;
  std::vector<MseCurve> curves;
  curves.reserve(values.size());
  for (double v : values) {
    InstanceSpec spec;
    spec.m = cfg.m;
    spec.s = cfg.s;
    spec.target_kappa = cfg.target_kappa;
    spec.noise_power = cfg.noise_power;
    spec.noise = cfg.noise;
    switch (cfg.sweep) {
      case SweepKind::kM: spec.m = static_cast<Index>(v); break;
      case SweepKind::kKappa: spec.target_kappa = v; break;
      case SweepKind::kNoisePower: spec.noise_power = v; break;
      case SweepKind::kNone: break;
    }
    if (cfg.fixed_truth) {
      std::mt19937_64 truth_rng(derive_seed(cfg.seed, ~std::uint64_t{0}));
      std::normal_distribution<double> nd;
      RealVector x(cfg.s);
      for (Index i = 0; i < cfg.s; ++i) x(i) = nd(truth_rng);
      spec.x_star = std::move(x);
    }
    curves.push_back(run_curve(spec, cfg, v));
  }
  return curves;
}

std::size_t flattening_round(const MseCurve& curve, double rel_tol) {
  if (curve.points.empty()) return 0;
  const double ref = curve.points.back().mse;
  std::size_t flat = curve.points.back().t;
  for (std::size_t k = curve.points.size(); k-- > 0;) {
    if (std::abs(curve.points[k].mse - ref) > rel_tol * ref) break;
    flat = curve.points[k].t;
  }
  return flat;
}

PredictionComparison predict_vs_measure(const LinearSystem& sys, std::size_t t_max) {
  if (!sys.x_star || !sys.w_tilde) {
    throw Error(ErrorCode::kMissingGroundTruth, "predict_vs_measure needs x* and w");
  }
  validate(sys);
  const auto blocks = partition_rows(sys);
  const auto spectrum = consensus_matrix(blocks);
  const TuningParams params = optimal_params(spectrum.theta_min, spectrum.theta_max);
  const auto projections = projections_for(blocks);
  const GainMatrix g = build_gain_matrix(projections, spectrum.x, params);
  const StateVector limit = limit_state(g, noise_drive(sys, blocks, params));
  const Vector limit_bar = limit.consensus_block();
  const ErrorPrediction pred = theorem3_error(sys, params, spectrum.x);

  RunOptions opt;
  opt.rounds = t_max;
  opt.params = params;
  const RunRecord rec = run_apc(sys, opt);

  PredictionComparison out;
  out.alpha = params.alpha;
  out.stated_sq = pred.asymptotic.squaredNorm();
  out.limit_sq = limit_bar.squaredNorm();
  for (const auto& [t, x_bar] : rec.trajectory) {
    const Vector err = x_bar - *sys.x_star;
    out.measured_sq.push_back(err.squaredNorm());
    out.transient.push_back((err - limit_bar).norm());
  }

  out.converged_round = t_max + 1;
  for (std::size_t t = 0; t <= t_max; ++t) {
    if (std::pow(params.alpha, static_cast<double>(t)) <= 1e-8) {
      out.converged_round = t;
      break;
    }
  }
  out.converged_in_range = out.converged_round <= t_max;
  const std::size_t at = std::min(out.converged_round, t_max);
  const Vector err = rec.trajectory[at].second - *sys.x_star;
  auto rel_gap = [&](const Vector& ref) {
    const double scale = ref.norm();
    const double diff = (err - ref).norm();
    return scale > 0.0 ? diff / scale : diff;
  };
  out.gap_vs_limit = rel_gap(limit_bar);
  out.gap_vs_stated = rel_gap(pred.asymptotic);
  return out;
}

}  // namespace apc
