#include "fairaudit/io.hpp"

#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void OutputSet::add(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

std::vector<fs::path> OutputSet::commit() {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir_.string() + ": " + ec.message());

  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    for (const auto& [tmp, dst] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [name, content] : files_) {
    const fs::path dst = dir_ / name;
    const fs::path tmp = dir_ / ("." + name + ".tmp" + std::to_string(::getpid()));
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      fail(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    staged.emplace_back(tmp, dst);
  }
  std::vector<fs::path> written;
  for (const auto& [tmp, dst] : staged) {
    fs::rename(tmp, dst, ec);
    if (ec) {
      cleanup();
      fail(ErrorCode::IoError, "cannot rename into " + dst.string() + ": " + ec.message());
    }
    written.push_back(dst);
  }
  files_.clear();
  return written;
}

}  // namespace fairaudit
