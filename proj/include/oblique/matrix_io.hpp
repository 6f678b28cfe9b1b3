#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "oblique/common.hpp"

namespace oblique {

// Plain-text matrix format: a `rows cols` header line followed by one
// whitespace-separated row per line. Values are written in the shortest
// decimal form that round-trips a double exactly.

Matrix read_matrix(std::istream& in);
Matrix read_matrix(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Shortest round-trip decimal representation of `x`.
std::string format_double(double x);

/// `x` with `digits` significant digits (general notation).
std::string format_significant(double x, int digits);

}  // namespace oblique
