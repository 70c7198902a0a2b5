#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace ledger_emd::text {

inline std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// Splits one CSV record. Fields may be double-quoted; a doubled quote inside
/// a quoted field is a literal quote. Whitespace around a field is dropped,
/// whitespace inside quotes is kept. Returns nullopt on an unterminated quote.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  std::optional<std::size_t> quoted_end;  // length of the field when its closing quote was read
  const auto finish = [&] {
    if (quoted_end && trim(std::string_view(field).substr(*quoted_end)).empty()) {
      field.resize(*quoted_end);
      fields.push_back(std::move(field));
    } else {
      fields.emplace_back(trim(field));
    }
    field.clear();
    quoted_end.reset();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
          quoted_end = field.size();
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (trim(field).empty()) field.clear();
      quoted = true;
    } else if (c == ',') {
      finish();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  finish();
  return fields;
}

/// Quotes a field only when it would not survive split_csv unquoted.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos && trim(s) == s) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Locale-independent parse of a finite decimal number.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/// Shortest "%.{digits}g"-style rendering, independent of the C locale.
inline std::string format_double(double value, int significant_digits = 12) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value,
                                       std::chars_format::general, significant_digits);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, ptr);
}

/// Shortest rendering that parses back to the identical double.
inline std::string format_round_trip(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, ptr);
}

/// Reads a line, stripping a trailing '\r'. Returns false at end of stream.
inline bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace ledger_emd::text
