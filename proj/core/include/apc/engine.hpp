#pragma once

// Round-based simulation of the federated solver: M agents each holding one
// row of A, and a server that averages their local solutions with momentum.
//
//   agent:  x_l(t+1) = x_l(t) + gamma * P_l (xbar(t) - x_l(t))
//   server: xbar(t+1) = (eta / M) * sum_l x_l(t+1) + (1 - eta) * xbar(t)
//
// Every round is bulk-synchronous: the server step starts only after all M
// agent updates of that round are in.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "apc/core_model.hpp"
#include "apc/scheduler.hpp"
#include "apc/tuning.hpp"

namespace apc {

struct AgentState {
  std::size_t index = 0;  // 1-based
  Projection projection;  // cached once, never recomputed
  Vector pinv_row;        // A_l^H (A_l A_l^H)^{-1}
  RowVector a_row;
  Scalar y = {};
  Vector x;               // current local solution x_l(t)

  // |A_l x_l - y_l| / (1 + |y_l|); stays at round-off because A_l P_l = 0.
  double local_residual() const;

  void step(const Vector& x_bar, double gamma);
};

AgentState agent_init(const RowBlock& block);

[[nodiscard]] AgentState agent_step(AgentState st, const Vector& x_bar, double gamma);

struct ServerState {
  Vector x_bar;
  TuningParams params;
  std::size_t round = 0;
  std::size_t num_agents = 0;
};

// Pairwise (tree) summation over vectors in ascending index order. The
// association pattern depends only on the count, so results are reproducible
// across schedulers.
Vector pairwise_sum(std::span<const Vector> vectors);

ServerState server_init(std::span<const Vector> agent_solutions,
                        const TuningParams& params = {});

/// Applies the momentum average. An empty slot signals an agent that did not
/// report this round and raises MissingAgent with its 1-based index.
ServerState server_step(const ServerState& st, std::span<const Vector> agent_solutions);

/// Rounds needed for alpha^T <= 1e-12, clamped to [1, 10000].
std::size_t default_rounds(double alpha);

struct RunRecord {
  std::vector<std::pair<std::size_t, Vector>> trajectory;  // (t, xbar(t)), t = 0..T
  Vector final;
  std::vector<double> per_round_error;  // ||xbar(t) - x*||_2, empty if x* unknown
  TuningParams params;
  std::size_t rounds = 0;
  double max_local_residual = 0.0;
};

using RoundObserver =
    std::function<void(std::size_t t, std::span<const AgentState>, const ServerState&)>;

struct RunOptions {
  std::optional<std::size_t> rounds;        // default_rounds(alpha) when absent
  std::optional<TuningParams> params;       // optimal_params on spec(X) when absent
  ExecutionMode mode = ExecutionMode::kSequential;
  std::size_t workers = 0;                  // threaded mode; 0 = hardware concurrency
  RoundObserver observer;                   // called for t = 0..T after each barrier
};

RunRecord run_apc(const LinearSystem& sys, const RunOptions& options = {});

/// Writes `t,err_l2[,x<i>_re,x<i>_im...]`, one row per round including t = 0.
/// err_l2 is emitted only when the record carries per-round errors.
void write_run_csv(const RunRecord& record, std::ostream& out,
                   bool include_coordinates = false);

}  // namespace apc
