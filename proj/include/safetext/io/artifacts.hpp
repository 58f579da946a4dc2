#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "safetext/models/model.hpp"

namespace safetext::io {

// FNV-1a over the raw bytes of a file.
std::uint64_t hash_file(const std::string& path);
std::string hash_file_hex(const std::string& path);

// Lossless JSON checkpoint: config, vocabularies, and every named parameter.
void save_checkpoint(const models::Model& model, const std::string& path);
std::unique_ptr<models::Model> load_checkpoint(const std::string& path);

// Every command writes one manifest describing its inputs and settings.
struct ManifestInput {
  std::string role;  // e.g. "stories", "checkpoint"
  std::string path;
};

void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::ordered_json& config,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& notes = {});

void write_json_file(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace safetext::io
