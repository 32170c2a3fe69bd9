#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

#include "a2dcdr/autodiff.hpp"
#include "a2dcdr/data.hpp"

namespace a2dcdr::testing {

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> normal(mean, sd);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("a2dcdr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// The scaled-down synthetic task used by the learning tests.
inline SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.user_count = 500;
  spec.item_counts = {200, 200};
  spec.shared_strength = 0.8;
  spec.exclusive_strength = 0.5;
  spec.seed = seed;
  return spec;
}

}  // namespace a2dcdr::testing
