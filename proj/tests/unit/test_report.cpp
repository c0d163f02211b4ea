#include <doctest.h>

#include <json.hpp>

#include "apc/report.hpp"
#include "oracles.hpp"

using namespace apc;
using nlohmann::json;

TEST_CASE("analysis of a noisy instance") {
  const auto sys = oracle::noisy_system(8, 3, 4, 0.05);
  const AnalysisReport rep = analyze(sys, 80);
  CHECK(rep.spectral.measured.size() == 27);
  CHECK(rep.spectral.match_residual <= 1e-6);
  REQUIRE(rep.prediction);
  REQUIRE(rep.limit_consensus);
  CHECK(oracle::rel_diff(rep.prediction->fixed_point, *rep.limit_consensus) <= 1e-8);
  REQUIRE(rep.transient_norms.size() == 81);
  CHECK(rep.transient_norms.back() < 1e-12 * rep.transient_norms.front());

  const json doc = json::parse(analysis_json(rep));
  CHECK(doc["tuning"]["alpha"].get<double>() == rep.params.alpha);
  CHECK(doc["spectral"]["measured"].size() == 27);
  CHECK(doc["spectral"]["measured"][0].size() == 2);
  CHECK(doc["spectral"]["predicted_xi"].size() == 3);
  CHECK(doc["prediction"]["asymptotic"].size() == 3);
  CHECK(doc["prediction"]["transient_norms"].size() == 81);
  CHECK(doc["multiplicity"]["rank_bound"] == 6);
}

TEST_CASE("noise is derived from the truth when only x* is given") {
  auto sys = oracle::noisy_system(6, 2, 2, 0.1);
  const Vector w = *sys.w_tilde;
  sys.w_tilde.reset();
  const AnalysisReport rep = analyze(sys);
  REQUIRE(rep.prediction);
  auto full = sys;
  full.w_tilde = w;
  CHECK(oracle::rel_diff(rep.prediction->asymptotic, analyze(full).prediction->asymptotic) <= 1e-12);
}

TEST_CASE("without ground truth the prediction is null") {
  auto sys = oracle::noisy_system(6, 2, 2, 0.1);
  sys.x_star.reset();
  sys.w_tilde.reset();
  const AnalysisReport rep = analyze(sys);
  CHECK_FALSE(rep.prediction);
  CHECK(rep.transient_norms.empty());
  CHECK(json::parse(analysis_json(rep))["prediction"].is_null());
}

TEST_CASE("standalone serialisers") {
  const auto rep = analyze(oracle::noisy_system(5, 2, 1, 0.1), 5);
  const json s = json::parse(spectral_report_json(rep.spectral));
  CHECK(s["alpha"].get<double>() == rep.spectral.alpha);
  CHECK(s["repeated"]["multiplicity"] == 8);
  const json p = json::parse(prediction_json(*rep.prediction, rep.transient_norms));
  CHECK(p["transient_norms"].size() == 6);
  CHECK(p["asymptotic_sq_norm"].get<double>() == doctest::Approx(rep.prediction->asymptotic.squaredNorm()));
}
