#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aspdc/field.hpp"

namespace aspdc::io {

/// Shortest round-trippable decimal ('.' separator, exponent allowed).
std::string format_number(double v);

/// 16-bit binary PGM (P5, big-endian), row-major, scaled so the peak maps to 65535.
void write_pgm16(const std::filesystem::path& path, const RealMap& intensity);

/// Comma-separated n x n values, LF line endings.
void write_map_csv(const std::filesystem::path& path, const RealMap& map);

/// Parses an n x n numeric CSV. Throws ParameterError with line information
/// on malformed or non-square input.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);
RealMap read_square_csv(const std::filesystem::path& path, double pitch);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace aspdc::io
