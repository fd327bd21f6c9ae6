#pragma once

// CSV and file helpers shared by the dataset, forest and evaluation formats.
// CSV dialect: comma separated, '.' decimal point, mandatory header row, no
// quoting. Numbers are written in shortest round-trip form.

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "urerf/matrix.hpp"

namespace urerf {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Data and oracle do not describe the same points, or no oracle exists.
struct OracleMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double value);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  DataMatrix values;

  /// Column position of `name`, or -1.
  long column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");

void write_csv_row(std::ostream& out, std::span<const double> values);
void write_csv_header(std::ostream& out, const std::vector<std::string>& names);

}  // namespace urerf
