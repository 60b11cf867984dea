#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tnilm::csv {

// A parsed CSV file. Rows are kept as raw strings; callers convert cells.
struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;  // empty when read without a header row
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

Table read(const std::filesystem::path& path, bool has_header = true);
Table parse(std::string_view text, bool has_header = true, std::filesystem::path source = "<memory>");

// Numeric cell parsing. Accepts inf/Inf/infinity (with optional sign).
// `row` and `col` are 1-based and only used for error messages.
double parse_number(std::string_view cell, const std::filesystem::path& source, std::size_t row,
                    std::size_t col);

// Empty cell -> nullopt.
std::optional<double> parse_optional_number(std::string_view cell,
                                            const std::filesystem::path& source,
                                            std::size_t row, std::size_t col);

// Shortest round-trip text for a double; "" for NaN.
std::string format_number(double value);

}  // namespace tnilm::csv
