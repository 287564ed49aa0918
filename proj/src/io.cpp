#include "diversenet/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>

#include "diversenet/errors.hpp"

namespace diversenet {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shorter form when it round-trips; keeps files readable.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(shorter, "%lf", &back);
    if (back == v) return shorter;
  }
  return buf;
}

double parse_double(const std::string& text, const std::string& context) {
  if (text.empty()) throw ParseError(context + ": empty numeric value");
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw ParseError(context + ": bad numeric value '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& context) {
  if (text.empty()) throw ParseError(context + ": empty integer value");
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size()) {
    throw ParseError(context + ": bad integer value '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

std::size_t parse_size(const std::string& text, const std::string& context) {
  return static_cast<std::size_t>(parse_u64(text, context));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = text.find_last_not_of(" \t\r\n");
  return text.substr(b, e - b + 1);
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& context) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const std::string& part : split(text, ',')) {
    out.push_back(parse_size(trim(part), context));
  }
  return out;
}

void write_f64_le(std::ostream& out, std::span<const double> values) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 8));
  } else {
    for (double v : values) {
      unsigned char bytes[8];
      std::memcpy(bytes, &v, 8);
      for (int i = 7; i >= 0; --i) out.put(static_cast<char>(bytes[i]));
    }
  }
}

void read_f64_le(std::istream& in, std::span<double> values, const std::string& context) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * 8));
    if (in.gcount() != static_cast<std::streamsize>(values.size() * 8)) {
      throw LoadError(context + ": truncated payload");
    }
  } else {
    for (double& v : values) {
      unsigned char bytes[8];
      for (int i = 7; i >= 0; --i) {
        int c = in.get();
        if (c == EOF) throw LoadError(context + ": truncated payload");
        bytes[i] = static_cast<unsigned char>(c);
      }
      std::memcpy(&v, bytes, 8);
    }
  }
}

}  // namespace diversenet
