#include "apc/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "apc/error.hpp"

namespace apc {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out << body;
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* ext) {
  return std::filesystem::path(prefix.string() + ext);
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

const char* distribution_name(NoiseDistribution d) {
  return d == NoiseDistribution::kGaussian ? "gaussian" : "uniform";
}

}  // namespace

std::string curves_to_csv(std::span<const MseCurve> curves) {
  std::string out = "sweep_value,T,mse,kappa,alpha,m,s,noise_power\n";
  for (const MseCurve& c : curves) {
    for (const MsePoint& p : c.points) {
      out += fmt17(c.sweep_value) + ',' + std::to_string(p.t) + ',' + fmt17(p.mse) + ',' +
             fmt17(c.kappa) + ',' + fmt17(c.alpha) + ',' + std::to_string(c.m) + ',' +
             std::to_string(c.s) + ',' + fmt17(c.noise_power) + '\n';
    }
  }
  return out;
}

std::vector<MseCurve> curves_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "sweep_value,T,mse,kappa,alpha,m,s,noise_power") {
    throw Error(ErrorCode::kInvalidArgument, "unexpected MSE CSV header");
  }
  std::vector<MseCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw Error(ErrorCode::kInvalidArgument, "bad CSV row: " + line);
    auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    const double sweep = num(cells[0]);
    if (curves.empty() || curves.back().sweep_value != sweep) {
      MseCurve c;
      c.sweep_value = sweep;
      c.kappa = num(cells[3]);
      c.alpha = num(cells[4]);
      c.m = std::stol(cells[5]);
      c.s = std::stol(cells[6]);
      c.noise_power = num(cells[7]);
      curves.push_back(std::move(c));
    }
    curves.back().points.push_back({std::stoul(cells[1]), num(cells[2])});
  }
  return curves;
}

std::string curves_to_svg(std::span<const MseCurve> curves, SweepKind sweep) {
  constexpr double kW = 720, kH = 460, kLeft = 80, kRight = 170, kTop = 30, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;

  std::size_t t_max = 1;
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const MseCurve& c : curves) {
    for (const MsePoint& p : c.points) {
      t_max = std::max(t_max, p.t);
      if (p.mse > 0.0) {
        lo = std::min(lo, p.mse);
        hi = std::max(hi, p.mse);
      }
    }
  }
  if (!(lo <= hi)) lo = hi = 1.0;
  double dlo = std::floor(std::log10(lo));
  double dhi = std::ceil(std::log10(hi));
  if (dhi <= dlo) dhi = dlo + 1;

  auto px = [&](double t) { return kLeft + pw * t / static_cast<double>(t_max); };
  auto py = [&](double v) {
    const double lv = v > 0.0 ? std::log10(v) : dlo;
    return kTop + ph * (dhi - lv) / (dhi - dlo);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = dlo; d <= dhi; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e"
        << static_cast<int>(d) << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, t_max / 10);
  for (std::size_t t = 0; t <= t_max; t += step) {
    svg << "<text x=\"" << px(static_cast<double>(t)) << "\" y=\"" << kTop + ph + 18
        << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\">T</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + ph / 2 << ")\">MSE</text>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const char* colour = kPalette[k % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" points=\"";
    for (const MsePoint& p : curves[k].points) {
      svg << fmt("%.2f", px(static_cast<double>(p.t))) << ',' << fmt("%.2f", py(p.mse)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 16 + 18 * static_cast<double>(k);
    const double lx = kLeft + pw + 14;
    svg << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 22 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    std::string label = sweep == SweepKind::kNone
                            ? "M=" + std::to_string(curves[k].m)
                            : to_string(sweep) + "=" + fmt("%g", curves[k].sweep_value);
    svg << "<text x=\"" << lx + 28 << "\" y=\"" << ly << "\">" << label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string metadata_json(std::span<const MseCurve> curves, const EmitMetadata& meta) {
  using nlohmann::json;
  const ExperimentConfig& c = meta.config;
  json doc;
  json cfg;
  cfg["m"] = c.m;
  cfg["s"] = c.s;
  cfg["kappa"] = c.target_kappa ? json(*c.target_kappa) : json(nullptr);
  cfg["noise_power"] = c.noise_power;
  cfg["trials"] = c.trials;
  cfg["t_max"] = c.t_max;
  cfg["seed"] = c.seed;
  cfg["sweep"] = to_string(c.sweep);
  cfg["sweep_values"] = c.sweep_values;
  cfg["noise_dist"] = distribution_name(c.noise);
  cfg["fixed_truth"] = c.fixed_truth;
  doc["config"] = cfg;
  doc["seeds"] = {{"base", c.seed},
                  {"rule", "trial k uses splitmix64(base + golden * (k + 1)); shared by all curves"}};
  // Choices made by this tool rather than measured quantities.
  doc["assumed_defaults"] = {{"s", c.s},
                             {"trials", c.trials},
                             {"noise_dist", distribution_name(c.noise)},
                             {"x_star", c.fixed_truth ? "fixed per curve" : "fresh N(0, I) per trial"}};
  json cs = json::array();
  for (const MseCurve& cv : curves) {
    cs.push_back({{"sweep_value", cv.sweep_value},
                  {"kappa", cv.kappa},
                  {"alpha", cv.alpha},
                  {"m", cv.m},
                  {"s", cv.s},
                  {"noise_power", cv.noise_power},
                  {"flattening_round", flattening_round(cv)}});
  }
  doc["curves"] = cs;
  doc["wall_seconds"] = meta.wall_seconds;
  return doc.dump(2) + "\n";
}

EmittedFiles emit_outputs(std::span<const MseCurve> curves, const std::filesystem::path& prefix,
                          const EmitMetadata& meta) {
  if (curves.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no curves to emit");
  }
  const std::string csv = curves_to_csv(curves);
  const std::string svg = curves_to_svg(curves, meta.config.sweep);
  const std::string js = metadata_json(curves, meta);

  EmittedFiles files{with_suffix(prefix, ".csv"), with_suffix(prefix, ".svg"),
                     with_suffix(prefix, ".json")};
  const auto parent = files.csv.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + parent.string());
  }
  write_file(files.csv, csv);
  write_file(files.svg, svg);
  write_file(files.json, js);
  return files;
}

}  // namespace apc
