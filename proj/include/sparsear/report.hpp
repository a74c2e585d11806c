#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sparsear {

/// Version stamped into every CSV row and JSON document the CLI emits.
inline constexpr int kSchemaVersion = 1;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws InvalidInputError when absent.
  std::size_t column(std::string_view name) const;
};

/// RFC 4180: comma separated, CRLF line endings, fields quoted only when
/// they contain a comma, quote, CR or LF.
std::string to_csv(const CsvTable& table);

/// Parses what to_csv writes (and plain LF files). Throws InvalidInputError
/// on unbalanced quotes or ragged rows.
CsvTable parse_csv(std::string_view text);

/// Shortest decimal that round-trips; NaN becomes an empty field.
std::string format_number(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Self-contained SVG line chart.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

/// Comma list whose items are numbers or inclusive ranges "a..b:step",
/// e.g. "1,10..100:10". Throws InvalidInputError.
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

}  // namespace sparsear
