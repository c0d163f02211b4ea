#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apc/engine.hpp"
#include "apc/error.hpp"
#include "apc/experiment.hpp"
#include "apc/instance_gen.hpp"
#include "apc/instance_io.hpp"
#include "apc/outputs.hpp"
#include "apc/report.hpp"

namespace {

constexpr int kValidationExit = 1;
constexpr int kNumericalExit = 2;

struct SolveArgs {
  std::string instance;
  std::optional<std::size_t> rounds;
  std::string csv;
  bool coordinates = false;
  std::size_t threads = 0;
};

struct AnalyzeArgs {
  std::string instance;
  std::size_t transient_rounds = 50;
};

struct BenchArgs {
  apc::ExperimentConfig cfg;
  std::optional<double> kappa;
  std::string sweep;
  std::string noise_dist = "gaussian";
  std::string out = "results/apc";
};

struct GenerateArgs {
  apc::InstanceSpec spec;
  std::optional<double> kappa;
  std::uint64_t seed = 42;
  std::string out;
};

void parse_sweep(const std::string& text, apc::ExperimentConfig& cfg) {
  if (text.empty()) return;
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw apc::Error(apc::ErrorCode::kInvalidArgument, "sweep must look like name=v1,v2,...");
  }
  const std::string name = text.substr(0, eq);
  if (name == "m") {
    cfg.sweep = apc::SweepKind::kM;
  } else if (name == "kappa") {
    cfg.sweep = apc::SweepKind::kKappa;
  } else if (name == "noise") {
    cfg.sweep = apc::SweepKind::kNoisePower;
  } else {
    throw apc::Error(apc::ErrorCode::kInvalidArgument, "unknown sweep '" + name + "'");
  }
  std::stringstream ss(text.substr(eq + 1));
  for (std::string cell; std::getline(ss, cell, ',');) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw apc::Error(apc::ErrorCode::kInvalidArgument, "bad sweep value '" + cell + "'");
    }
    cfg.sweep_values.push_back(v);
  }
}

apc::NoiseDistribution parse_noise(const std::string& name) {
  if (name == "gaussian") return apc::NoiseDistribution::kGaussian;
  if (name == "uniform") return apc::NoiseDistribution::kUniform;
  throw apc::Error(apc::ErrorCode::kInvalidArgument, "noise-dist must be gaussian or uniform");
}

void print_vector(const apc::Vector& v) {
  for (apc::Index i = 0; i < v.size(); ++i) {
    std::printf("%.17g %.17g\n", v(i).real(), v(i).imag());
  }
}

int run_solve(const SolveArgs& args) {
  const apc::LinearSystem sys = apc::load_instance(args.instance);
  apc::RunOptions opt;
  opt.rounds = args.rounds;
  if (args.threads > 0) {
    opt.mode = apc::ExecutionMode::kThreaded;
    opt.workers = args.threads;
  }
  const apc::RunRecord rec = apc::run_apc(sys, opt);
  std::fprintf(stderr, "rounds=%zu gamma=%.17g eta=%.17g alpha=%.17g kappa=%.17g\n", rec.rounds,
               rec.params.gamma, rec.params.eta, rec.params.alpha, rec.params.kappa);
  print_vector(rec.final);
  if (!args.csv.empty()) {
    std::ofstream out(args.csv);
    if (!out) throw apc::Error(apc::ErrorCode::kIoError, "cannot open " + args.csv);
    apc::write_run_csv(rec, out, args.coordinates);
  }
  return 0;
}

int run_analyze(const AnalyzeArgs& args) {
  const apc::LinearSystem sys = apc::load_instance(args.instance);
  std::cout << apc::analysis_json(apc::analyze(sys, args.transient_rounds));
  return 0;
}

int run_bench(BenchArgs args) {
  args.cfg.target_kappa = args.kappa;
  args.cfg.noise = parse_noise(args.noise_dist);
  parse_sweep(args.sweep, args.cfg);
  apc::validate(args.cfg);

  const auto start = std::chrono::steady_clock::now();
  const auto curves = apc::run_mse_experiment(args.cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const apc::EmittedFiles files = apc::emit_outputs(curves, args.out, {args.cfg, wall});
  for (const apc::MseCurve& c : curves) {
    std::printf("%s=%g kappa=%.4f alpha=%.4f mse(0)=%.4e mse(%zu)=%.4e flat@T=%zu\n",
                apc::to_string(args.cfg.sweep).c_str(), c.sweep_value, c.kappa, c.alpha,
                c.points.front().mse, c.points.back().t, c.points.back().mse,
                apc::flattening_round(c));
  }
  std::printf("wrote %s, %s, %s (%.2fs)\n", files.csv.c_str(), files.svg.c_str(),
              files.json.c_str(), wall);
  return 0;
}

int run_generate(GenerateArgs args) {
  args.spec.target_kappa = args.kappa;
  std::mt19937_64 rng(args.seed);
  const apc::LinearSystem sys = apc::generate_instance(args.spec, rng);
  if (args.out.empty()) {
    std::cout << apc::instance_to_json(sys);
  } else {
    apc::save_instance(sys, args.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated projection-consensus linear solver"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run the solver on an instance file and print the estimate");
  solve_cmd->add_option("instance", solve.instance, "Instance JSON")->required();
  solve_cmd->add_option("--t", solve.rounds, "Rounds (default: enough for alpha^T <= 1e-12)");
  solve_cmd->add_option("--csv", solve.csv, "Write the per-round trajectory as CSV");
  solve_cmd->add_flag("--coordinates", solve.coordinates, "Include xbar(t) coordinates in the CSV");
  solve_cmd->add_option("--threads", solve.threads, "Run agents on a worker pool of this size");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Spectral report and asymptotic error prediction as JSON");
  analyze_cmd->add_option("instance", analyze.instance, "Instance JSON")->required();
  analyze_cmd->add_option("--transient-rounds", analyze.transient_rounds, "Rounds of transient norms to report");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo MSE experiment");
  bench_cmd->add_option("--m", bench.cfg.m, "Number of agents (rows)");
  bench_cmd->add_option("--s", bench.cfg.s, "Unknowns (columns)");
  bench_cmd->add_option("--kappa", bench.kappa, "Target condition number of X");
  bench_cmd->add_option("--noise-power", bench.cfg.noise_power, "Per-entry noise variance");
  bench_cmd->add_option("--trials", bench.cfg.trials, "Trials per curve");
  bench_cmd->add_option("--t-max", bench.cfg.t_max, "Largest T");
  bench_cmd->add_option("--seed", bench.cfg.seed, "Base seed");
  bench_cmd->add_option("--out", bench.out, "Output prefix for .csv/.svg/.json");
  bench_cmd->add_option("--sweep", bench.sweep, "m=8,32,128 | kappa=1.56,3.0,6.0 | noise=1e-5,1e-4,1e-3");
  bench_cmd->add_option("--noise-dist", bench.noise_dist, "gaussian|uniform");
  bench_cmd->add_flag("--fixed-truth", bench.cfg.fixed_truth, "Share one x* across the trials of a curve");
  bench_cmd->add_option("--workers", bench.cfg.workers, "Trial worker threads (0 = all cores)");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a random instance file");
  gen_cmd->add_option("--m", gen.spec.m, "Rows")->required();
  gen_cmd->add_option("--s", gen.spec.s, "Columns")->required();
  gen_cmd->add_option("--kappa", gen.kappa, "Target condition number of X");
  gen_cmd->add_option("--noise-power", gen.spec.noise_power, "Per-entry noise variance");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--out", gen.out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidationExit;
  }

  try {
    if (*solve_cmd) return run_solve(solve);
    if (*analyze_cmd) return run_analyze(analyze);
    if (*bench_cmd) return run_bench(bench);
    if (*gen_cmd) return run_generate(gen);
  } catch (const apc::Error& e) {
    std::fprintf(stderr, "apc: %s: %s\n", std::string(apc::to_string(e.code())).c_str(), e.what());
    return apc::is_numerical(e.code()) ? kNumericalExit : kValidationExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "apc: %s\n", e.what());
    return kValidationExit;
  }
  return kValidationExit;
}
