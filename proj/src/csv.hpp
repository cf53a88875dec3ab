#pragma once

// Internal CSV helpers shared by the loaders and writers. The formats here
// are plain comma-separated UTF-8 with a required header and no quoting;
// output always uses LF line endings.

#include <cstdio>
#include <string>
#include <vector>

namespace vminpred::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // cells, sized like header
};

/// Reads and splits a CSV file. Throws IoError if unreadable, EmptyFile if
/// there are no data rows, ParseError on ragged rows (1-based row reported).
Table read_file(const std::string& path);

std::vector<std::string> split_line(const std::string& line);

/// Strict double parse of a full cell; row/column context goes into the
/// ParseError message.
double parse_double(const std::string& cell, std::size_t row, const std::string& col);
long parse_int(const std::string& cell, std::size_t row, const std::string& col);

/// Shortest form with 9 significant digits (die/probe CSV precision).
std::string format_g9(double v);
/// 12 significant digits (report values; keeps mean-row recomputation tight).
std::string format_g12(double v);

}  // namespace vminpred::csv
