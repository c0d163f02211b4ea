#include <doctest.h>

#include <cmath>
#include <set>

#include "apc/error.hpp"
#include "apc/instance_gen.hpp"
#include "oracles.hpp"

using namespace apc;

namespace {

double kappa_of(const LinearSystem& sys) { return consensus_matrix(sys).kappa(); }

}  // namespace

TEST_CASE("square kappa one target gives orthogonal rows") {
  for (Index s : {2, 5, 9}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(s));
    InstanceSpec spec;
    spec.m = s;
    spec.s = s;
    spec.target_kappa = 1.0;
    const LinearSystem sys = generate_instance(spec, rng);
    const auto cs = consensus_matrix(sys);
    CHECK((cs.x - Matrix::Identity(s, s) / static_cast<double>(s)).norm() <= 1e-14);
    CHECK(cs.kappa() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("tight frames have unit rows and flat frame operator") {
  std::mt19937_64 rng(3);
  const RealMatrix f = tight_frame(32, 16, rng);
  for (Index r = 0; r < 32; ++r) CHECK(f.row(r).norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((f.transpose() * f - 2.0 * RealMatrix::Identity(16, 16)).norm() <= 1e-10);
  CHECK(measured_kappa(f) - 1.0 <= 1e-12);
}

TEST_CASE("noise-free instances are exact") {
  std::mt19937_64 rng(8);
  InstanceSpec spec;
  spec.m = 10;
  spec.s = 4;
  const LinearSystem sys = generate_instance(spec, rng);
  CHECK(sys.w_tilde->norm() == 0.0);
  CHECK((sys.y - sys.a * *sys.x_star).norm() == 0.0);
  CHECK(sys.a.imag().norm() == 0.0);
}

TEST_CASE("kappa targets are met within two percent") {
  for (std::uint64_t seed : {1u, 2u, 3u, 42u, 1234u}) {
    std::mt19937_64 rng(seed);
    InstanceSpec spec;
    spec.m = 32;
    spec.s = 16;
    spec.target_kappa = 1.6;
    spec.noise_power = 1e-4;
    const double k = kappa_of(generate_instance(spec, rng));
    CAPTURE(seed);
    CHECK(k >= 1.568);
    CHECK(k <= 1.632);
  }
  for (double target : {1.2, 3.0, 6.0, 20.0}) {
    for (auto [m, s] : {std::pair<Index, Index>{8, 4}, {32, 16}, {128, 16}}) {
      std::mt19937_64 rng(7);
      InstanceSpec spec;
      spec.m = m;
      spec.s = s;
      spec.target_kappa = target;
      const double k = kappa_of(generate_instance(spec, rng));
      CAPTURE(target);
      CAPTURE(m);
      CHECK(std::abs(k / target - 1.0) <= 0.02);
    }
  }
}

TEST_CASE("kappa targeting needs two columns") {
  std::mt19937_64 rng(1);
  InstanceSpec spec;
  spec.m = 5;
  spec.s = 1;
  spec.target_kappa = 2.0;
  CHECK_THROWS_AS(generate_instance(spec, rng), Error);
  spec.target_kappa = 0.5;
  spec.s = 2;
  CHECK_THROWS_AS(generate_instance(spec, rng), Error);
}

TEST_CASE("unreachable kappa is reported as such") {
  // Sixty column halvings stretch kappa to about 1e36 at most.
  std::mt19937_64 rng(1);
  InstanceSpec spec;
  spec.m = 2;
  spec.s = 2;
  spec.target_kappa = 1e300;
  try {
    (void)generate_instance(spec, rng);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kKappaUnreachable);
    CHECK(is_numerical(e.code()));
  }
}

TEST_CASE("noise power is the per-entry variance") {
  for (auto dist : {NoiseDistribution::kGaussian, NoiseDistribution::kUniform}) {
    std::mt19937_64 rng(11);
    InstanceSpec spec;
    spec.m = 20000;
    spec.s = 2;
    spec.noise_power = 0.25;
    spec.noise = dist;
    const LinearSystem sys = generate_instance(spec, rng);
    const Vector& w = *sys.w_tilde;
    const double mean = w.real().mean();
    const double var = (w.real().array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(0.25).epsilon(0.05));
    if (dist == NoiseDistribution::kUniform) {
      CHECK(w.real().cwiseAbs().maxCoeff() <= std::sqrt(3.0 * 0.25));
    }
  }
}

TEST_CASE("equal seeds give proportional noise across powers") {
  InstanceSpec spec;
  spec.m = 16;
  spec.s = 4;
  spec.target_kappa = 2.0;
  spec.noise_power = 1e-4;
  std::mt19937_64 r1(5);
  const LinearSystem a = generate_instance(spec, r1);
  spec.noise_power = 1e-2;
  std::mt19937_64 r2(5);
  const LinearSystem b = generate_instance(spec, r2);
  CHECK(a.a == b.a);
  CHECK(*a.x_star == *b.x_star);
  CHECK((*b.w_tilde - 10.0 * *a.w_tilde).norm() <= 1e-14 * b.w_tilde->norm());
}

TEST_CASE("fixed truth is used as given") {
  std::mt19937_64 rng(2);
  InstanceSpec spec;
  spec.m = 6;
  spec.s = 3;
  spec.x_star = RealVector::LinSpaced(3, 1.0, 3.0);
  const LinearSystem sys = generate_instance(spec, rng);
  CHECK((sys.x_star->real() - *spec.x_star).norm() == 0.0);
  spec.x_star = RealVector::Ones(2);
  CHECK_THROWS_AS(generate_instance(spec, rng), Error);
}

TEST_CASE("derived seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 10000; ++k) seen.insert(derive_seed(42, k));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  CHECK(derive_seed(42, 7) != derive_seed(43, 7));
}

TEST_CASE("generated instances validate") {
  std::mt19937_64 rng(9);
  InstanceSpec spec;
  spec.m = 12;
  spec.s = 5;
  spec.target_kappa = 3.0;
  spec.noise_power = 1e-3;
  CHECK_NOTHROW(validate(generate_instance(spec, rng)));
}
