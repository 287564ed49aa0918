#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diversenet/tensor.hpp"

namespace diversenet {

inline constexpr const char* kModelMagic = "DIVNET01";

// The self-describing header of a persisted model artifact: a kind tag,
// ordered config key=value pairs, and the tensor manifest. The binary
// payload that follows holds the tensors as little-endian float64 in
// manifest order.
struct ArtifactHeader {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> tensors;

  const std::string& config_value(const std::string& key, const std::string& context) const;
};

void write_artifact(std::ostream& out, const std::string& kind,
                    std::span<const std::pair<std::string, std::string>> config,
                    std::span<const NamedTensor> tensors);

ArtifactHeader read_artifact_header(std::istream& in, const std::string& context);

// Reads payloads in manifest order and verifies nothing trails the payload.
std::vector<NamedTensor> read_artifact_payload(std::istream& in, const ArtifactHeader& header,
                                               const std::string& context);

}  // namespace diversenet
