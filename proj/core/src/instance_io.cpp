#include "apc/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "apc/error.hpp"

namespace apc {

namespace {

using nlohmann::json;

json pairs(const Eigen::Ref<const Vector>& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Vector parse_pairs(const json& node, Index expected, const char* field) {
  if (!node.is_array() || static_cast<Index>(node.size()) != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string("field '") + field + "' must hold " +
                    std::to_string(expected) + " [re, im] pairs");
  }
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) {
    const json& p = node[static_cast<std::size_t>(i)];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("field '") + field + "' entry " +
                      std::to_string(i) + " is not an [re, im] pair");
    }
    v(i) = Scalar(p[0].get<double>(), p[1].get<double>());
  }
  return v;
}

}  // namespace

std::string instance_to_json(const LinearSystem& sys) {
  const Index m = sys.rows();
  const Index s = sys.cols();
  json doc;
  doc["m"] = m;
  doc["s"] = s;
  json a = json::array();
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < s; ++c) a.push_back({sys.a(r, c).real(), sys.a(r, c).imag()});
  }
  doc["a"] = std::move(a);
  doc["y"] = pairs(sys.y);
  doc["x_star"] = sys.x_star ? pairs(*sys.x_star) : json(nullptr);
  doc["w"] = sys.w_tilde ? pairs(*sys.w_tilde) : json(nullptr);
  return doc.dump();
}

LinearSystem instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad instance JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("m") || !doc.contains("s") ||
      !doc["m"].is_number_integer() || !doc["s"].is_number_integer()) {
    throw Error(ErrorCode::kInvalidArgument, "instance needs integer 'm' and 's'");
  }
  const auto m = doc["m"].get<Index>();
  const auto s = doc["s"].get<Index>();
  if (m < 1 || s < 1) {
    throw Error(ErrorCode::kInvalidArgument, "'m' and 's' must be positive");
  }

  LinearSystem sys;
  const Vector flat = parse_pairs(doc.value("a", json()), m * s, "a");
  sys.a.resize(m, s);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < s; ++c) sys.a(r, c) = flat(r * s + c);
  }
  sys.y = parse_pairs(doc.value("y", json()), m, "y");
  if (doc.contains("x_star") && !doc["x_star"].is_null()) {
    sys.x_star = parse_pairs(doc["x_star"], s, "x_star");
  }
  if (doc.contains("w") && !doc["w"].is_null()) {
    sys.w_tilde = parse_pairs(doc["w"], m, "w");
  }
  return sys;
}

void save_instance(const LinearSystem& sys, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out << instance_to_json(sys) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

LinearSystem load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

}  // namespace apc
