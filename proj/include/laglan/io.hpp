#pragma once

#include <iosfwd>
#include <string>
#include <vector>

/// @file io.hpp
/// Result persistence: numeric CSV tables that round-trip exactly.  Values
/// are written with 17 significant digits, so parsing a file we wrote
/// reproduces the in-memory doubles bit for bit.

namespace laglan {

/// Decimal form of x that parses back to the identical double.
std::string format_double(double x);

/// A header row plus homogeneous numeric rows.  Comment lines (leading '#')
/// carry free-form metadata such as the generating configuration.
struct CsvTable {
  std::vector<std::string> comments;  ///< without the '#' prefix
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const CsvTable& table);

/// Parses a table in the format write_csv emits.  Throws
/// std::runtime_error on ragged rows or non-numeric fields.
CsvTable read_csv(std::istream& is);

}  // namespace laglan
