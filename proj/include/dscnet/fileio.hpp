#pragma once

#include <filesystem>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace dscnet {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<char> read_file(const std::filesystem::path& path);

/// Writes to "<path>.tmp" then renames over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
void write_file_atomic(const std::filesystem::path& path, const std::vector<char>& bytes);

}  // namespace dscnet
