#pragma once

// Per-stage run manifests: config hash, seed, stage version and content
// hashes of every input and output artifact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

namespace outage {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct StageManifest {
  std::string stage;
  int version = 1;
  std::uint64_t seed = 0;
  std::string config_sha256;
  std::map<std::string, std::string> inputs;   // artifact name -> sha256
  std::map<std::string, std::string> outputs;

  bool operator==(const StageManifest&) const = default;
};

nlohmann::json manifest_to_json(const StageManifest& m);
StageManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const StageManifest& m, const std::filesystem::path& path);
StageManifest read_manifest(const std::filesystem::path& path);

}  // namespace outage
