#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include "renewal/errors.hpp"
#include "renewal/process.hpp"

namespace renewal {

inline constexpr std::string_view kTraceHeader = "n,P,gap,lambda,log_lambda,S";

/// Shortest decimal string that parses back to the same double.
inline std::string format_real(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw NumericFailure("cannot format real");
  return {buffer, end};
}

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& row : trace.rows) {
    out << row.n << ',' << row.p << ',' << row.gap << ',' << format_real(row.lambda) << ','
        << format_real(row.log_lambda) << ',' << format_real(row.s) << '\n';
  }
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, std::string("bad value for column ") + name + ": '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ParseError(line, std::string("non-finite ") + name);
  }
  return value;
}

}  // namespace detail

/// Reads a trace CSV. Rows must be strictly increasing in n and P; errors name
/// the 1-based file line. The prefix and config are not part of the file.
inline Trace read_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty trace file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError(line_no, "expected header '" + std::string(kTraceHeader) + "'");
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 6) throw ParseError(line_no, "expected 6 columns, got " + std::to_string(fields.size()));
    TraceRow row;
    row.n = detail::parse_field<std::uint64_t>(fields[0], line_no, "n");
    row.p = detail::parse_field<std::uint64_t>(fields[1], line_no, "P");
    row.gap = detail::parse_field<std::uint64_t>(fields[2], line_no, "gap");
    row.lambda = detail::parse_field<double>(fields[3], line_no, "lambda");
    row.log_lambda = detail::parse_field<double>(fields[4], line_no, "log_lambda");
    row.s = detail::parse_field<double>(fields[5], line_no, "S");
    if (row.n == 0) throw ParseError(line_no, "n must be >= 1");
    if (!trace.rows.empty()) {
      const auto& prev = trace.rows.back();
      if (row.n <= prev.n) throw ParseError(line_no, "rows not strictly increasing in n");
      if (row.p <= prev.p) throw ParseError(line_no, "rows not strictly increasing in P");
    }
    trace.rows.push_back(row);
  }
  if (trace.rows.empty()) throw ParseError(line_no, "trace has no rows");
  return trace;
}

}  // namespace renewal
