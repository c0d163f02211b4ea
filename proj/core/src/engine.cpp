#include "apc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "apc/error.hpp"

namespace apc {

double AgentState::local_residual() const {
  return std::abs((a_row * x)(0) - y) / (1.0 + std::abs(y));
}

void AgentState::step(const Vector& x_bar, double gamma) {
  if (x_bar.size() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "agent " + std::to_string(index) + " received a consensus vector of length " +
                    std::to_string(x_bar.size()));
  }
  const Vector diff = x_bar - x;
  x.noalias() += gamma * (projection.p * diff);
}

AgentState agent_init(const RowBlock& block) {
  AgentState st;
  st.index = block.index;
  st.projection = projection_complement(block);
  st.pinv_row = row_pseudoinverse(block);
  st.a_row = block.a_row;
  st.y = block.y;
  st.x = st.pinv_row * block.y;
  return st;
}

AgentState agent_step(AgentState st, const Vector& x_bar, double gamma) {
  st.step(x_bar, gamma);
  return st;
}

namespace {

Vector tree_sum(std::span<const Vector> v) {
  if (v.size() == 1) return v.front();
  const std::size_t half = v.size() / 2;
  Vector left = tree_sum(v.first(half));
  left += tree_sum(v.subspan(half));
  return left;
}

void check_solutions(std::span<const Vector> solutions, std::size_t expected, Index dim) {
  if (solutions.size() < expected) {
    throw Error(ErrorCode::kMissingAgent,
                "agent " + std::to_string(solutions.size() + 1) + " did not report",
                solutions.size() + 1);
  }
  if (solutions.size() > expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                "received " + std::to_string(solutions.size()) + " updates for " +
                    std::to_string(expected) + " agents");
  }
  for (std::size_t l = 0; l < solutions.size(); ++l) {
    if (solutions[l].size() == 0) {
      throw Error(ErrorCode::kMissingAgent,
                  "agent " + std::to_string(l + 1) + " did not report", l + 1);
    }
    if (solutions[l].size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "agent " + std::to_string(l + 1) + " sent a vector of length " +
                      std::to_string(solutions[l].size()));
    }
  }
}

}  // namespace

Vector pairwise_sum(std::span<const Vector> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "pairwise_sum of nothing");
  }
  return tree_sum(vectors);
}

ServerState server_init(std::span<const Vector> agent_solutions, const TuningParams& params) {
  if (agent_solutions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "server needs at least one agent");
  }
  const Index dim = agent_solutions.front().size();
  if (dim == 0) {
    throw Error(ErrorCode::kMissingAgent, "agent 1 did not report", 1);
  }
  check_solutions(agent_solutions, agent_solutions.size(), dim);
  ServerState st;
  st.num_agents = agent_solutions.size();
  st.x_bar = pairwise_sum(agent_solutions) / static_cast<double>(st.num_agents);
  st.params = params;
  st.round = 0;
  return st;
}

ServerState server_step(const ServerState& st, std::span<const Vector> agent_solutions) {
  check_solutions(agent_solutions, st.num_agents, st.x_bar.size());
  const double eta = st.params.eta;
  ServerState next;
  next.num_agents = st.num_agents;
  next.params = st.params;
  next.round = st.round + 1;
  next.x_bar = (eta / static_cast<double>(st.num_agents)) * pairwise_sum(agent_solutions) +
               (1.0 - eta) * st.x_bar;
  return next;
}

std::size_t default_rounds(double alpha) {
  if (!(alpha > 0.0)) return 1;
  if (alpha >= 1.0) return 10000;
  const double t = std::ceil(std::log(1e-12) / std::log(alpha));
  return static_cast<std::size_t>(std::clamp(t, 1.0, 10000.0));
}

RunRecord run_apc(const LinearSystem& sys, const RunOptions& options) {
  validate(sys);
  const auto blocks = partition_rows(sys);
  const ConsensusSpectrum spectrum = consensus_matrix(blocks);

  RunRecord rec;
  rec.params = options.params ? *options.params
                              : optimal_params(spectrum.theta_min, spectrum.theta_max);
  rec.rounds = options.rounds ? *options.rounds : default_rounds(rec.params.alpha);

  std::vector<AgentState> agents;
  agents.reserve(blocks.size());
  for (const RowBlock& block : blocks) agents.push_back(agent_init(block));

  std::vector<Vector> gather(agents.size());
  for (std::size_t l = 0; l < agents.size(); ++l) gather[l] = agents[l].x;
  ServerState server = server_init(gather, rec.params);

  auto record_round = [&](std::size_t t) {
    if (!server.x_bar.allFinite()) {
      throw Error(ErrorCode::kNonFinite,
                  "consensus iterate diverged at round " + std::to_string(t), t);
    }
    for (const AgentState& a : agents) {
      rec.max_local_residual = std::max(rec.max_local_residual, a.local_residual());
    }
    rec.trajectory.emplace_back(t, server.x_bar);
    if (sys.x_star) rec.per_round_error.push_back((server.x_bar - *sys.x_star).norm());
    if (options.observer) options.observer(t, agents, server);
  };
  record_round(0);

  auto scheduler = make_scheduler(options.mode, options.workers);
  const double gamma = rec.params.gamma;
  for (std::size_t t = 0; t < rec.rounds; ++t) {
    const Vector& x_bar = server.x_bar;
    // Each agent writes only its own state and gather slot.
    scheduler->run_round(agents.size(), [&](std::size_t l) {
      agents[l].step(x_bar, gamma);
      gather[l] = agents[l].x;
    });
    for (std::size_t l = 0; l < agents.size(); ++l) {
      if (!gather[l].allFinite()) {
        throw Error(ErrorCode::kNonFinite,
                    "agent " + std::to_string(l + 1) + " diverged at round " +
                        std::to_string(t + 1),
                    t + 1);
      }
    }
    server = server_step(server, gather);
    record_round(server.round);
  }
  rec.final = server.x_bar;
  return rec;
}

void write_run_csv(const RunRecord& record, std::ostream& out, bool include_coordinates) {
  const bool with_err = !record.per_round_error.empty();
  out << 't';
  if (with_err) out << ",err_l2";
  const Index dim = record.trajectory.empty() ? 0 : record.trajectory.front().second.size();
  if (include_coordinates) {
    for (Index i = 0; i < dim; ++i) out << ",x" << i << "_re,x" << i << "_im";
  }
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < record.trajectory.size(); ++k) {
    const auto& [t, x] = record.trajectory[k];
    out << t;
    if (with_err) {
      std::snprintf(buf, sizeof buf, "%.17g", record.per_round_error[k]);
      out << ',' << buf;
    }
    if (include_coordinates) {
      for (Index i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", x(i).real());
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", x(i).imag());
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace apc
