#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dscnet/image.hpp"

namespace dscnet {

/// Malformed or unsupported PNM data; `offset` is the byte position of the fault.
class PnmError : public std::runtime_error {
 public:
  PnmError(const std::string& detail, std::size_t offset, const std::string& source = "");
  std::size_t offset() const { return offset_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

/// Binary P5 (1 channel) or P6 (3 channels), maxval 255 only.
Image8 decode_pnm(const std::vector<char>& bytes);
std::vector<char> encode_pnm(const Image8& image);

Image8 read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image8& image);

/// Masks are P5 files holding 0 and 255; in memory they hold 0 and 1.
Image8 read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Image8& mask);
Image8 decode_mask(const std::vector<char>& bytes);

}  // namespace dscnet
