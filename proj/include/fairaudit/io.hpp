#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fairaudit {

std::string read_text_file(const std::filesystem::path& path);

/// Collects output files and writes them all at once: each goes to a
/// temporary name first and is renamed into place, so a failure before
/// commit() leaves the output directory untouched.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content);
  /// Creates the directory if needed and returns the written paths.
  std::vector<std::filesystem::path> commit();

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace fairaudit
