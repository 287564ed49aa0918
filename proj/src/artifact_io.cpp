#include "diversenet/artifact_io.hpp"

#include <istream>
#include <ostream>

#include "diversenet/errors.hpp"
#include "diversenet/io.hpp"

namespace diversenet {

const std::string& ArtifactHeader::config_value(const std::string& key,
                                                const std::string& context) const {
  for (const auto& [k, v] : config) {
    if (k == key) return v;
  }
  throw LoadError(context + ": missing config field '" + key + "'");
}

void write_artifact(std::ostream& out, const std::string& kind,
                    std::span<const std::pair<std::string, std::string>> config,
                    std::span<const NamedTensor> tensors) {
  out << kModelMagic << "\n";
  out << "kind=" << kind << "\n";
  out << "[config]\n";
  for (const auto& [k, v] : config) out << k << "=" << v << "\n";
  out << "[tensors]\n";
  for (const auto& t : tensors) {
    out << t.name;
    for (std::size_t e : t.tensor.shape()) out << " " << e;
    out << "\n";
  }
  out << "[payload]\n";
  for (const auto& t : tensors) write_f64_le(out, t.tensor.values());
}

namespace {

std::string next_line(std::istream& in, const std::string& context) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError(context + ": unexpected end of header");
  return line;
}

}  // namespace

ArtifactHeader read_artifact_header(std::istream& in, const std::string& context) {
  ArtifactHeader header;
  std::string magic = next_line(in, context);
  if (magic != kModelMagic) {
    throw LoadError(context + ": bad magic '" + magic + "', expected '" + kModelMagic + "'");
  }
  std::string kind_line = next_line(in, context);
  if (kind_line.rfind("kind=", 0) != 0) {
    throw LoadError(context + ": expected kind line, got '" + kind_line + "'");
  }
  header.kind = kind_line.substr(5);
  if (next_line(in, context) != "[config]") throw LoadError(context + ": missing [config]");
  std::string line;
  while ((line = next_line(in, context)) != "[tensors]") {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw LoadError(context + ": malformed config line '" + line + "'");
    }
    header.config.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  while ((line = next_line(in, context)) != "[payload]") {
    std::vector<std::string> parts = split(line, ' ');
    if (parts.size() < 2) throw LoadError(context + ": malformed tensor line '" + line + "'");
    std::vector<std::size_t> shape;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      shape.push_back(parse_size(parts[i], context + ": tensor '" + parts[0] + "'"));
    }
    header.tensors.emplace_back(parts[0], std::move(shape));
  }
  return header;
}

std::vector<NamedTensor> read_artifact_payload(std::istream& in, const ArtifactHeader& header,
                                               const std::string& context) {
  std::vector<NamedTensor> out;
  out.reserve(header.tensors.size());
  for (const auto& [name, shape] : header.tensors) {
    Tensor t{shape};
    read_f64_le(in, t.values(), context + ": tensor '" + name + "'");
    out.push_back({name, std::move(t)});
  }
  if (in.peek() != EOF) throw LoadError(context + ": trailing data after payload");
  return out;
}

}  // namespace diversenet
