#include "run_manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace a2dcdr::cli {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_manifest(RunManifest manifest, const fs::path& dir, const std::string& name) {
  manifest.artifacts.clear();
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != name) manifest.artifacts.push_back(rel);
  }
  std::sort(manifest.artifacts.begin(), manifest.artifacts.end());

  nlohmann::json j;
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  j["dataset_fingerprint"] = manifest.dataset_fingerprint;
  j["seed"] = manifest.seed;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["artifacts"] = manifest.artifacts;
  for (const auto& [k, v] : manifest.extra.items()) j[k] = v;
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << j.dump(2) << '\n';
}

}  // namespace a2dcdr::cli
