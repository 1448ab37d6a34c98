#pragma once

// Minimal RFC-4180 reader/writer. Quoted fields may contain commas, doubled
// quotes and line breaks; CRLF and LF line endings are both accepted.

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "xg/error.hpp"

namespace xg::csv {

using Row = std::vector<std::string>;

struct Record {
  Row fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// Reads the next record. Returns false at end of input.
inline bool read_record(std::istream& in, Record& out, std::size_t& line) {
  out.fields.clear();
  out.line = line + 1;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool field_was_quoted = false;
  int c;
  while ((c = in.get()) != std::char_traits<char>::eof()) {
    any = true;
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (ch == ',') {
      out.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\r') {
      if (in.peek() == '\n') continue;
      ++line;
      out.fields.push_back(std::move(field));
      return true;
    } else if (ch == '\n') {
      ++line;
      out.fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::BadValue, "unterminated quoted field starting on line " +
                                         std::to_string(out.line),
                static_cast<std::int64_t>(out.line));
  }
  if (!any) return false;
  out.fields.push_back(std::move(field));
  ++line;
  return true;
}

inline std::string escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

/// Shortest decimal string that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

/// Fixed-point formatting for human-facing tables.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

inline bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline bool parse_int(std::string_view text, long long& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace xg::csv
