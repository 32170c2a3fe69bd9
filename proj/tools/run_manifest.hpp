#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace a2dcdr::cli {

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::string dataset_fingerprint;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> artifacts;  // relative to the manifest's directory
  nlohmann::json extra = nlohmann::json::object();
};

std::string utc_now();

// Lists every regular file under `dir` (sorted, manifest itself excluded), then writes it.
void write_manifest(RunManifest manifest, const std::filesystem::path& dir, const std::string& name = "manifest.json");

}  // namespace a2dcdr::cli
