#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "bhk/field.hpp"

namespace bhk {

// BHF1: "BHF1", u32 n, N, components, representation; f64 L; f64 values (all little-endian)
void write_field(const Field& f, const std::filesystem::path& path, const std::optional<std::string>& sidecar_json = {});
Field read_field(const std::filesystem::path& path);
std::optional<std::string> read_sidecar(const std::filesystem::path& path);

}  // namespace bhk
