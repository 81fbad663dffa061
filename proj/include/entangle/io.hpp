#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "entangle/errors.hpp"
#include "entangle/hash.hpp"

namespace entangle::io {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + p.string() + "'");
  return ss.str();
}

/// Writes to a sibling temp file, then renames over the target, so readers
/// never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  }
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + p.string() + "': " + ec.message());
}

/// FNV-1a 64 of a file's bytes, hex encoded.
inline std::string file_checksum(const std::filesystem::path& p) {
  return hex64(fnv1a64(read_file(p)));
}

}  // namespace entangle::io
