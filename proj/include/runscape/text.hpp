#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace runscape {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// "Violence and sexual offences" -> "violence-and-sexual-offences".
std::string slugify(std::string_view s);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerant.
/// Quoted fields may not span lines.
std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> row_lines;  // 1-based source line of each row

  /// Column index by case-insensitive name, or -1.
  int column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);

std::string csv_escape(std::string_view field);

std::string read_file(const std::string& path);  // throws Error
void write_file(const std::string& path, std::string_view bytes);

}  // namespace runscape
