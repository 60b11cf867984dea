#include "tnilm/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tnilm/error.hpp"

namespace tnilm::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto c = column(name)) {
    return *c;
  }
  throw ValidationError(fmt::format("{}: missing column '{}'", source.string(), name));
}

Table read(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(fmt::format("cannot open file '{}'", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), has_header, path);
}

Table parse(std::string_view text, bool has_header, std::filesystem::path source) {
  Table table;
  table.source = std::move(source);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  std::size_t pos = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") {
    pos = 3;
  }
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw ValidationError(
              fmt::format("{}: line {}: unexpected quote inside field", table.source.string(), line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw ValidationError(fmt::format("{}: unterminated quoted field", table.source.string()));
  }
  if (field_started || !record.empty()) {
    end_record();
  }

  auto trim = [](std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    s = first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
  };
  for (auto& r : records) {
    for (auto& f : r) trim(f);
  }

  if (has_header) {
    if (records.empty()) {
      throw ValidationError(fmt::format("{}: missing header row", table.source.string()));
    }
    table.header = std::move(records.front());
    records.erase(records.begin());
  }
  table.rows = std::move(records);
  return table;
}

double parse_number(std::string_view cell, const std::filesystem::path& source, std::size_t row,
                    std::size_t col) {
  std::string_view s = cell;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  std::string_view body = s;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  if (body == "inf" || body == "Inf" || body == "INF" || body == "infinity" || body == "Infinity") {
    return negative ? -std::numeric_limits<double>::infinity()
                    : std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || std::isnan(value)) {
    throw ValidationError(fmt::format("{}: row {}, column {}: '{}' is not a number",
                                      source.string(), row, col, cell));
  }
  return value;
}

std::optional<double> parse_optional_number(std::string_view cell,
                                            const std::filesystem::path& source,
                                            std::size_t row, std::size_t col) {
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
    return std::nullopt;
  }
  return parse_number(cell, source, row, col);
}

std::string format_number(double value) {
  if (std::isnan(value)) {
    return {};
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  return fmt::format("{}", value);
}

}  // namespace tnilm::csv
