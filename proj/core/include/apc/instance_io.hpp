#pragma once

#include <filesystem>
#include <string>

#include "apc/core_model.hpp"

namespace apc {

// Instance documents:
//   {"m": M, "s": s, "a": [[re, im], ...] (row-major, M*s pairs),
//    "y": [[re, im], ...], "x_star": [...] | null, "w": [...] | null}
// Finite doubles survive save/load bit-for-bit.
std::string instance_to_json(const LinearSystem& sys);
LinearSystem instance_from_json(const std::string& text);

void save_instance(const LinearSystem& sys, const std::filesystem::path& path);
LinearSystem load_instance(const std::filesystem::path& path);

}  // namespace apc
