#pragma once

#include <string>

namespace mpccert {

/// Fixed-format number for CSV output: "%.10g", with inf/-inf/nan spelled out.
[[nodiscard]] std::string format_double(double v);

/// Writes to path + ".tmp" and renames over path. Throws with the path on failure.
void write_file_atomic(const std::string& path, const std::string& content);

[[nodiscard]] std::string read_file(const std::string& path);

}  // namespace mpccert
