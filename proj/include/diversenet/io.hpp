#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace diversenet {

// Shortest-looking decimal that round-trips a double exactly (%.17g).
std::string fmt_double(double v);

// Strict numeric parsing; `context` names the field in the error message.
double parse_double(const std::string& text, const std::string& context);
std::uint64_t parse_u64(const std::string& text, const std::string& context);
std::size_t parse_size(const std::string& text, const std::string& context);

std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

std::string join_sizes(const std::vector<std::size_t>& v);
std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& context);

// Little-endian float64 payload IO.
void write_f64_le(std::ostream& out, std::span<const double> values);
void read_f64_le(std::istream& in, std::span<double> values, const std::string& context);

}  // namespace diversenet
