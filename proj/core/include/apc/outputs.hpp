#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "apc/experiment.hpp"

namespace apc {

struct EmitMetadata {
  ExperimentConfig config;
  double wall_seconds = 0.0;
};

struct EmittedFiles {
  std::filesystem::path csv;
  std::filesystem::path svg;
  std::filesystem::path json;
};

/// Writes <prefix>.csv, <prefix>.svg and <prefix>.json. Everything is rendered
/// in memory first; an empty curve list raises InvalidArgument before any file
/// is touched.
EmittedFiles emit_outputs(std::span<const MseCurve> curves, const std::filesystem::path& prefix,
                          const EmitMetadata& meta);

// Header: sweep_value,T,mse,kappa,alpha,m,s,noise_power. Numbers use %.17g.
std::string curves_to_csv(std::span<const MseCurve> curves);

// Inverse of curves_to_csv; consecutive rows with the same sweep_value form a curve.
std::vector<MseCurve> curves_from_csv(std::istream& in);

// Log-scale MSE-versus-T line chart, one polyline per curve.
std::string curves_to_svg(std::span<const MseCurve> curves, SweepKind sweep);

std::string metadata_json(std::span<const MseCurve> curves, const EmitMetadata& meta);

}  // namespace apc
