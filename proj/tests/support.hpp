#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <multifid/configspace.hpp>

namespace testing {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(MULTIFID_DATA_DIR) / rel; }

inline std::shared_ptr<const multifid::ConfigurationSpace> space(const std::string& file) {
  return std::make_shared<const multifid::ConfigurationSpace>(multifid::ConfigurationSpace::load(data_path(file)));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("multifid-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
