#pragma once

#include "rbm/types.hpp"

#include <filesystem>
#include <string>

namespace rbm {

/// Comma-separated numeric matrix, one row per line. Blank lines and lines
/// starting with '#' are skipped. Throws std::runtime_error with the line
/// number on malformed input.
Matrix load_matrix_csv(const std::filesystem::path& path);
Matrix parse_matrix_csv(const std::string& text);

/// Writes with 17 significant digits. Throws std::runtime_error on I/O failure.
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);

/// "%.17g" formatting used by every artifact writer.
std::string format_double(double v);

}  // namespace rbm
