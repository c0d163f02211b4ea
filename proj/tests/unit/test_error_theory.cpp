#include <doctest.h>

#include <cmath>

#include "apc/engine.hpp"
#include "apc/error.hpp"
#include "apc/error_theory.hpp"
#include "apc/instance_gen.hpp"
#include "oracles.hpp"

using namespace apc;

namespace {

struct Setup {
  LinearSystem sys;
  std::vector<RowBlock> blocks;
  std::vector<Projection> projections;
  ConsensusSpectrum spectrum;
  TuningParams params;
  GainMatrix g;
  StateVector d0;
  NoiseDrive wd;
};

Setup setup(const LinearSystem& sys) {
  Setup s;
  s.sys = sys;
  s.blocks = partition_rows(sys);
  s.projections = projections_for(s.blocks);
  s.spectrum = consensus_matrix(s.blocks);
  s.params = optimal_params(s.spectrum.theta_min, s.spectrum.theta_max);
  s.g = build_gain_matrix(s.projections, s.spectrum.x, s.params);
  s.d0 = initial_state(sys, s.blocks, s.projections);
  s.wd = noise_drive(sys, s.blocks, s.params);
  return s;
}

LinearSystem scalar_system(double a, double x, double w) {
  const RealMatrix am = RealMatrix::Constant(1, 1, a);
  const RealVector xv = RealVector::Constant(1, x);
  const RealVector wv = RealVector::Constant(1, w);
  return LinearSystem::from_real(am, am * xv + wv, xv, wv);
}

// Engine snapshots stacked as d(t) for t = 0..rounds.
std::vector<Vector> engine_states(const LinearSystem& sys, std::size_t rounds) {
  std::vector<Vector> out;
  RunOptions opt;
  opt.rounds = rounds;
  opt.observer = [&](std::size_t, std::span<const AgentState> agents, const ServerState& srv) {
    std::vector<Vector> xs;
    for (const AgentState& a : agents) xs.push_back(a.x);
    out.push_back(stack_errors(xs, srv.x_bar, *sys.x_star).d);
  };
  (void)run_apc(sys, opt);
  return out;
}

}  // namespace

TEST_CASE("initial state of the identity system") {
  const RealVector x = (RealVector(3) << 1, 2, 3).finished();
  const auto sys = LinearSystem::from_real(RealMatrix::Identity(3, 3), x, x, RealVector::Zero(3));
  const auto st = setup(sys);
  const Vector e1 = (Vector(3) << 0.0, -2.0, -3.0).finished();
  CHECK((st.d0.agent_block(1) - e1).norm() == 0.0);
  CHECK((st.d0.consensus_block() - (*sys.x_star / 3.0 - *sys.x_star)).norm() < 1e-15);
}

TEST_CASE("noise-free initial error is the projected truth") {
  const auto st = setup(oracle::noisy_system(6, 3, 2, 0.0));
  for (std::size_t l = 1; l <= 6; ++l) {
    const Vector expect = -(st.projections[l - 1].p * *st.sys.x_star);
    CHECK((st.d0.agent_block(l) - expect).norm() < 1e-15);
  }
}

TEST_CASE("initial state equals the engine's first snapshot") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sys = oracle::complex_system(7, 3, seed, 0.2);
    const auto st = setup(sys);
    const auto states = engine_states(sys, 0);
    CHECK((states.front() - st.d0.d).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("missing ground truth") {
  auto sys = oracle::noisy_system(4, 2, 1, 0.1);
  sys.w_tilde.reset();
  const auto blocks = partition_rows(sys);
  const auto proj = projections_for(blocks);
  try {
    (void)initial_state(sys, blocks, proj);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingGroundTruth);
  }
  CHECK_THROWS_AS((void)noise_drive(sys, blocks, TuningParams{}), Error);
}

TEST_CASE("noise drive layout") {
  const auto st = setup(oracle::noisy_system(5, 2, 3, 0.3));
  Vector sum = Vector::Zero(2);
  for (std::size_t l = 1; l <= 5; ++l) {
    const Vector v = row_pseudoinverse(st.blocks[l - 1]) * (*st.sys.w_tilde)(static_cast<Index>(l - 1));
    CHECK((st.wd.w_d.segment(static_cast<Index>(l - 1) * 2, 2) - st.params.gamma * v).norm() < 1e-15);
    sum += v;
  }
  const Vector tail = st.wd.w_d.tail(2);
  CHECK((tail - st.params.eta * st.params.gamma / 5.0 * sum).norm() < 1e-15);
}

TEST_CASE("one engine round is G d + w_d") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sys = oracle::noisy_system(6, 3, seed, 0.2);
    const auto st = setup(sys);
    const auto states = engine_states(sys, 5);
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
      const Vector next = st.g.g * states[t] + st.wd.w_d;
      CHECK((next - states[t + 1]).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("closed form at t = 0 and without noise") {
  const auto st = setup(oracle::noisy_system(6, 3, 4, 0.1));
  const auto c0 = closed_form_state(st.g, st.d0, st.wd, 0, st.params.alpha);
  CHECK((c0.state.d - st.d0.d).cwiseAbs().maxCoeff() <= 1e-13);

  NoiseDrive zero = st.wd;
  zero.w_d.setZero();
  for (std::size_t t : {1u, 3u, 10u}) {
    const auto c = closed_form_state(st.g, st.d0, zero, t, st.params.alpha);
    CHECK((c.state.d - matrix_power(st.g.g, t) * st.d0.d).norm() <= 1e-14);
    CHECK(c.path_gap <= 1e-12);
  }
}

TEST_CASE("scalar zero-G system settles on the drive after one round") {
  const auto st = setup(scalar_system(2.0, 1.5, 0.4));
  CHECK(st.g.g.norm() == 0.0);
  for (std::size_t t = 1; t <= 5; ++t) {
    const auto c = closed_form_state(st.g, st.d0, st.wd, t, st.params.alpha);
    CHECK((c.state.d - st.wd.w_d).norm() <= 1e-15);
    CHECK((c.partial_sum - st.wd.w_d).norm() <= 1e-15);
  }
  const StateVector lim = limit_state(st.g, st.wd);
  CHECK((lim.d - st.wd.w_d).norm() <= 1e-15);
  // Both blocks carry w/a.
  CHECK(std::abs(lim.consensus_block()(0) - 0.2) < 1e-15);
}

TEST_CASE("matrix power by squaring") {
  const auto st = setup(oracle::noisy_system(4, 2, 3, 0.0));
  Matrix direct = Matrix::Identity(st.g.size(), st.g.size());
  for (int t = 0; t <= 13; ++t) {
    CHECK((matrix_power(st.g.g, static_cast<std::size_t>(t)) - direct).norm() <= 1e-13);
    direct = direct * st.g.g;
  }
}

TEST_CASE("limit state") {
  SUBCASE("noise-free limit is zero") {
    const auto st = setup(oracle::noisy_system(6, 3, 2, 0.0));
    CHECK(limit_state(st.g, st.wd).d.norm() == 0.0);
  }
  SUBCASE("closed form at t = 200 reaches the limit") {
    const auto st = setup(oracle::noisy_system(8, 3, 5, 0.1));
    const auto c = closed_form_state(st.g, st.d0, st.wd, 200, st.params.alpha);
    CHECK((c.state.d - limit_state(st.g, st.wd).d).norm() <= 1e-8);
    CHECK(c.path_gap <= 1e-9);
  }
  SUBCASE("limit is a fixed point of the recursion") {
    const auto st = setup(oracle::complex_system(7, 3, 8, 0.1));
    const StateVector lim = limit_state(st.g, st.wd);
    CHECK((st.g.g * lim.d + st.wd.w_d - lim.d).norm() <= 1e-12 * st.wd.w_d.norm());
  }
}

TEST_CASE("unstable tuning makes I - G singular") {
  const auto base = setup(oracle::noisy_system(4, 2, 1, 0.1));
  // gamma = 0 freezes the agents, so G has the eigenvalue 1.
  TuningParams p = base.params;
  p.gamma = 0.0;
  const GainMatrix g = build_gain_matrix(base.projections, base.spectrum.x, p);
  try {
    (void)limit_state(g, base.wd);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingularIminusG);
    CHECK(is_numerical(e.code()));
  }
}

TEST_CASE("engine trajectory equals the closed form") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto sys = seed % 2 ? oracle::noisy_system(9, 4, seed, 0.1)
                              : oracle::complex_system(6, 3, seed, 0.1);
    const auto st = setup(sys);
    const auto states = engine_states(sys, 50);
    const Vector lim = limit_state(st.g, st.wd).d;
    double worst = 0.0;
    double decomp = 0.0;
    Matrix gt = Matrix::Identity(st.g.size(), st.g.size());
    for (std::size_t t = 0; t <= 50; ++t) {
      const auto c = closed_form_state(st.g, st.d0, st.wd, t, st.params.alpha);
      worst = std::max(worst, (c.state.d - states[t]).cwiseAbs().maxCoeff());
      CHECK(c.path_gap <= 1e-9);
      decomp = std::max(decomp, (states[t] - lim - gt * (st.d0.d - lim)).cwiseAbs().maxCoeff());
      gt = gt * st.g.g;
    }
    CHECK(worst <= 1e-9);
    CHECK(decomp <= 1e-9);
  }
}

TEST_CASE("projected agent error differs from the error by the local noise") {
  const auto sys = oracle::complex_system(8, 3, 2, 0.3);
  const auto blocks = partition_rows(sys);
  const auto proj = projections_for(blocks);
  RunOptions opt;
  opt.rounds = 30;
  double worst = 0.0;
  opt.observer = [&](std::size_t, std::span<const AgentState> agents, const ServerState&) {
    for (std::size_t l = 0; l < agents.size(); ++l) {
      const Vector e = agents[l].x - *sys.x_star;
      const Vector noise = row_pseudoinverse(blocks[l]) * (*sys.w_tilde)(static_cast<Index>(l));
      worst = std::max(worst, (proj[l].p * e - (e - noise)).norm());
    }
  };
  (void)run_apc(sys, opt);
  CHECK(worst <= 1e-9);
}

TEST_CASE("asymptotic error formulas") {
  SUBCASE("noise-free") {
    const auto st = setup(oracle::noisy_system(6, 3, 1, 0.0));
    const auto pred = theorem3_error(st.sys, st.params, st.spectrum.x);
    CHECK(pred.asymptotic.norm() == 0.0);
    CHECK(pred.fixed_point.norm() == 0.0);
  }
  SUBCASE("weights are inverse squared row norms") {
    const auto st = setup(oracle::complex_system(5, 2, 3, 0.1));
    const auto pred = theorem3_error(st.sys, st.params, st.spectrum.x);
    for (Index l = 0; l < 5; ++l) {
      CHECK(pred.xi_diag(l) > 0.0);
      CHECK(pred.xi_diag(l) == doctest::Approx(1.0 / st.sys.a.row(l).squaredNorm()).epsilon(1e-15));
    }
    CHECK(pred.transient_rate == st.params.alpha);
  }
  SUBCASE("scalar system") {
    const double a = 2.0;
    const double w = 0.4;
    const auto st = setup(scalar_system(a, 1.5, w));
    const auto pred = theorem3_error(st.sys, st.params, st.spectrum.x);
    // The stated closed form evaluates to w / (2a); the recursion settles at w / a.
    CHECK(std::abs(pred.asymptotic(0) - w / (2.0 * a)) < 1e-15);
    CHECK(std::abs(pred.fixed_point(0) - w / a) < 1e-15);
    CHECK(std::abs(limit_state(st.g, st.wd).consensus_block()(0) - w / a) < 1e-15);
  }
  SUBCASE("fixed point equals the consensus block of the limit") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const auto st = setup(seed % 2 ? oracle::noisy_system(8, 3, seed, 0.1)
                                     : oracle::complex_system(8, 3, seed, 0.1));
      const auto pred = theorem3_error(st.sys, st.params, st.spectrum.x);
      const Vector lim = limit_state(st.g, st.wd).consensus_block();
      CHECK(oracle::rel_diff(pred.fixed_point, lim) <= 1e-8);
      CHECK(oracle::rel_diff(pred.asymptotic, pred.fixed_point / (1.0 + st.params.eta)) <= 1e-15);
    }
  }
  SUBCASE("linear in the noise") {
    auto sys = oracle::noisy_system(8, 3, 7, 0.1);
    const auto st1 = setup(sys);
    *sys.w_tilde *= 2.0;
    sys.y = sys.a * *sys.x_star + *sys.w_tilde;
    const auto st2 = setup(sys);
    const auto p1 = theorem3_error(st1.sys, st1.params, st1.spectrum.x);
    const auto p2 = theorem3_error(st2.sys, st2.params, st2.spectrum.x);
    CHECK((p2.asymptotic - 2.0 * p1.asymptotic).norm() <= 1e-10 * p1.asymptotic.norm());

    RunOptions opt;
    opt.rounds = 200;
    const Vector e1 = run_apc(st1.sys, opt).final - *sys.x_star;
    const Vector e2 = run_apc(st2.sys, opt).final - *sys.x_star;
    CHECK((e2 - 2.0 * e1).norm() <= 1e-10 * e1.norm());
  }
}

TEST_CASE("epsilon decays at the contraction rate") {
  for (double target : {2.0, 4.0, 9.0}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(target * 10));
    InstanceSpec spec;
    spec.m = 12;
    spec.s = 4;
    spec.target_kappa = target;
    spec.noise_power = 1e-3;
    const auto st = setup(generate_instance(spec, rng));
    const DecayFit fit = epsilon_decay_check(st.g, st.d0, st.wd, 60, st.params.alpha);
    CAPTURE(target);
    CHECK_FALSE(fit.skipped);
    CHECK(fit.fitted_points >= 2);
    CHECK(std::abs(fit.slope - fit.expected) <= 0.05);
    CHECK(fit.slope <= fit.expected + 0.05);
  }
}

TEST_CASE("kappa 4 slope is close to ln(1/3)") {
  std::mt19937_64 rng(44);
  InstanceSpec spec;
  spec.m = 10;
  spec.s = 3;
  spec.target_kappa = 4.0;
  spec.noise_power = 1e-4;
  const auto st = setup(generate_instance(spec, rng));
  const DecayFit fit = epsilon_decay_check(st.g, st.d0, st.wd, 40, st.params.alpha);
  CHECK(std::abs(fit.slope - std::log(1.0 / 3.0)) <= 0.05);
}

TEST_CASE("zero contraction dies in two steps") {
  const RealVector x = (RealVector(3) << 1, -2, 0.5).finished();
  const RealVector w = (RealVector(3) << 0.1, 0.2, -0.3).finished();
  const auto sys = LinearSystem::from_real(RealMatrix::Identity(3, 3), x + w, x, w);
  const auto st = setup(sys);
  REQUIRE(st.params.alpha == 0.0);
  const DecayFit fit = epsilon_decay_check(st.g, st.d0, st.wd, 10, st.params.alpha);
  CHECK(fit.skipped);
  CHECK(fit.norms[0] > 0.0);
  for (std::size_t t = 2; t < fit.norms.size(); ++t) CHECK(fit.norms[t] <= 1e-15);
}

TEST_CASE("epsilon is linear in the initial state and drive") {
  const auto st = setup(oracle::noisy_system(8, 3, 3, 0.1));
  StateVector d0 = st.d0;
  NoiseDrive wd = st.wd;
  d0.d *= 10.0;
  wd.w_d *= 10.0;
  const DecayFit a = epsilon_decay_check(st.g, st.d0, st.wd, 20, st.params.alpha);
  const DecayFit b = epsilon_decay_check(st.g, d0, wd, 20, st.params.alpha);
  for (std::size_t t = 0; t < a.norms.size(); ++t) {
    CHECK(b.norms[t] == doctest::Approx(10.0 * a.norms[t]).epsilon(1e-12));
  }
}

TEST_CASE("underflow stops the sequence") {
  const auto st = setup(oracle::noisy_system(8, 3, 3, 0.1));
  const DecayFit fit = epsilon_decay_check(st.g, st.d0, st.wd, 5000, st.params.alpha);
  CHECK(fit.underflow);
  CHECK(fit.norms.back() < 1e-300);
  CHECK(fit.norms.size() < 5001);
  CHECK(std::abs(fit.slope - fit.expected) <= 0.05);
}
