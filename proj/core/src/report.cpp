#include "apc/report.hpp"

#include <json.hpp>

namespace apc {

namespace {

using nlohmann::json;

json pair(const Scalar& z) { return json::array({z.real(), z.imag()}); }

json pairs(std::span<const Scalar> zs) {
  json out = json::array();
  for (const Scalar& z : zs) out.push_back(pair(z));
  return out;
}

json pairs(const Vector& v) { return pairs(std::span<const Scalar>(v.data(), static_cast<std::size_t>(v.size()))); }

json spectral_node(const SpectralReport& rep) {
  json xi = json::array();
  for (const PredictedPair& p : rep.predicted_xi) {
    xi.push_back({{"i", p.i},
                  {"theta", p.theta},
                  {"plus", pair(p.plus)},
                  {"minus", pair(p.minus)},
                  {"quadratic_agreement", p.agreement},
                  {"quadratic_residual", p.quadratic_residual}});
  }
  json matches = json::array();
  for (const EigenvalueMatch& m : rep.matches) {
    matches.push_back({{"predicted", pair(m.predicted)},
                       {"measured", pair(m.measured)},
                       {"distance", m.distance}});
  }
  return {{"repeated", {{"value", pair(rep.repeated_value)},
                        {"multiplicity", rep.repeated_multiplicity}}},
          {"predicted_xi", xi},
          {"measured", pairs(rep.measured)},
          {"matches", matches},
          {"rho_measured", rep.rho_measured},
          {"rho_raw", rep.rho_raw},
          {"alpha", rep.alpha},
          {"match_residual", rep.match_residual},
          {"max_modulus_deviation", rep.max_modulus_deviation}};
}

json prediction_node(const ErrorPrediction& pred, std::span<const double> transient) {
  return {{"asymptotic", pairs(pred.asymptotic)},
          {"asymptotic_sq_norm", pred.asymptotic.squaredNorm()},
          {"fixed_point", pairs(pred.fixed_point)},
          {"fixed_point_sq_norm", pred.fixed_point.squaredNorm()},
          {"xi_diag", std::vector<double>(pred.xi_diag.data(),
                                          pred.xi_diag.data() + pred.xi_diag.size())},
          {"alpha", pred.transient_rate},
          {"transient_norms", std::vector<double>(transient.begin(), transient.end())}};
}

}  // namespace

AnalysisReport analyze(const LinearSystem& input, std::size_t transient_rounds) {
  LinearSystem sys = input;
  validate(sys);
  if (sys.x_star && !sys.w_tilde) sys.w_tilde = sys.y - sys.a * *sys.x_star;

  const auto blocks = partition_rows(sys);
  const auto projections = projections_for(blocks);
  AnalysisReport rep;
  rep.spectrum = consensus_matrix(blocks);
  rep.params = optimal_params(rep.spectrum.theta_min, rep.spectrum.theta_max);
  rep.tuning = tuning_residuals(rep.params, rep.spectrum.theta_min, rep.spectrum.theta_max);

  const GainMatrix g = build_gain_matrix(projections, rep.spectrum.x, rep.params);
  rep.spectral = verify_spectrum(g, rep.spectrum.thetas, rep.params);
  rep.eigenvectors = verify_eigenvector_formula(g, rep.spectrum, projections, rep.params);
  rep.multiplicity = verify_multiplicity_structure(g, rep.spectrum.thetas, rep.params);
  rep.min_singular_i_minus_g = min_singular_value_of_i_minus_g(g);

  if (sys.w_tilde) {
    rep.prediction = theorem3_error(sys, rep.params, rep.spectrum.x);
    const NoiseDrive wd = noise_drive(sys, blocks, rep.params);
    const StateVector limit = limit_state(g, wd);
    rep.limit_consensus = Vector(limit.consensus_block());
    if (sys.x_star) {
      Vector dev = initial_state(sys, blocks, projections).d - limit.d;
      for (std::size_t t = 0; t <= transient_rounds; ++t) {
        if (t > 0) dev = g.g * dev;
        rep.transient_norms.push_back(dev.tail(g.dim).norm());
      }
    }
  }
  return rep;
}

std::string spectral_report_json(const SpectralReport& rep) { return spectral_node(rep).dump(2); }

std::string prediction_json(const ErrorPrediction& pred, std::span<const double> transient_norms) {
  return prediction_node(pred, transient_norms).dump(2);
}

std::string analysis_json(const AnalysisReport& rep) {
  json doc;
  doc["consensus"] = {
      {"thetas", std::vector<double>(rep.spectrum.thetas.data(),
                                     rep.spectrum.thetas.data() + rep.spectrum.thetas.size())},
      {"theta_min", rep.spectrum.theta_min},
      {"theta_max", rep.spectrum.theta_max},
      {"kappa", rep.spectrum.kappa()}};
  doc["tuning"] = {{"gamma", rep.params.gamma},
                   {"eta", rep.params.eta},
                   {"alpha", rep.params.alpha},
                   {"kappa", rep.params.kappa},
                   {"residual_upper", rep.tuning.upper},
                   {"residual_lower", rep.tuning.lower},
                   {"residual_alpha", rep.tuning.alpha_identity}};
  doc["spectral"] = spectral_node(rep.spectral);

  json skipped = json::array();
  for (const SkippedPair& sp : rep.eigenvectors.degenerate) {
    skipped.push_back({{"i", sp.i}, {"sign", sp.sign}, {"xi", pair(sp.xi)}});
  }
  doc["eigenvector_formula"] = {{"max_residual", rep.eigenvectors.max_residual},
                                {"checked", rep.eigenvectors.checked},
                                {"degenerate", skipped}};

  json clusters = json::array();
  for (const ClusterMultiplicity& c : rep.multiplicity.xi_clusters) {
    clusters.push_back({{"value", pair(c.value)},
                        {"algebraic", c.algebraic},
                        {"geometric", c.geometric}});
  }
  doc["multiplicity"] = {{"rank_shifted", rep.multiplicity.rank_shifted},
                         {"rank_bound", rep.multiplicity.rank_bound},
                         {"repeated_geometric", rep.multiplicity.repeated_geometric},
                         {"xi_clusters", clusters},
                         {"ill_separated", pairs(rep.multiplicity.ill_separated)}};
  doc["min_singular_i_minus_g"] = rep.min_singular_i_minus_g;
  if (rep.prediction) {
    doc["prediction"] = prediction_node(*rep.prediction, rep.transient_norms);
    doc["prediction"]["limit_consensus"] = pairs(*rep.limit_consensus);
  } else {
    doc["prediction"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

}  // namespace apc
