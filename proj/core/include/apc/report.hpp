#pragma once

#include <optional>
#include <string>

#include "apc/core_model.hpp"
#include "apc/error_theory.hpp"
#include "apc/spectral.hpp"
#include "apc/tuning.hpp"

namespace apc {

/// Everything `apc analyze` reports for one instance.
struct AnalysisReport {
  ConsensusSpectrum spectrum;
  TuningParams params;
  TuningResiduals tuning;
  SpectralReport spectral;
  EigenvectorCheck eigenvectors;
  MultiplicityReport multiplicity;
  double min_singular_i_minus_g = 0.0;
  std::optional<ErrorPrediction> prediction;  // needs w, or x* to derive it
  std::optional<Vector> limit_consensus;      // ebar(inf)
  std::vector<double> transient_norms;        // ||G^t (d(0) - d(inf))||, t = 0..transient_rounds
};

AnalysisReport analyze(const LinearSystem& sys, std::size_t transient_rounds = 50);

std::string spectral_report_json(const SpectralReport& rep);
std::string prediction_json(const ErrorPrediction& pred, std::span<const double> transient_norms);
std::string analysis_json(const AnalysisReport& rep);

}  // namespace apc
