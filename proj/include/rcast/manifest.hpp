#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rcast/config.hpp"
#include "rcast/field.hpp"
#include "rcast/model_io.hpp"

namespace rcast {

inline constexpr const char* kToolVersion = "0.1.0";

/// Record written next to every command output. Everything except
/// wall_time_seconds is a function of the inputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_hash;
  std::map<std::string, std::string> data_hashes;
  std::uint64_t base_seed = 0;
  std::string tool_version = kToolVersion;
  double wall_time_seconds = 0.0;

  void add_file(const std::string& label, const std::filesystem::path& path) {
    data_hashes[label] = hex64(fnv1a(read_text_file(path)));
  }

  json to_json() const {
    json j;
    j["command"] = command;
    j["arguments"] = arguments;
    j["config_hash"] = config_hash;
    json d = json::object();
    for (const auto& [k, v] : data_hashes) d[k] = v;
    j["data_hashes"] = d;
    j["base_seed"] = base_seed;
    j["tool_version"] = tool_version;
    j["wall_time_seconds"] = wall_time_seconds;
    return j;
  }

  void write(const std::filesystem::path& path) const { write_file_atomic(path, dump_json(to_json())); }
};

inline std::string config_hash(const ModelConfig& cfg) { return hex64(fnv1a(config_to_json(cfg).dump())); }

}  // namespace rcast
