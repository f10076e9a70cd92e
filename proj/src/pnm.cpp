#include "dscnet/pnm.hpp"

#include <cctype>

#include "dscnet/fileio.hpp"

namespace dscnet {

PnmError::PnmError(const std::string& detail, std::size_t offset, const std::string& source)
    : std::runtime_error((source.empty() ? "pnm" : source) + ": " + detail + " at byte " +
                         std::to_string(offset)),
      detail_(detail),
      offset_(offset) {}

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::vector<char>& bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  std::size_t pos() const { return pos_; }
  // Start of the most recent number token.
  std::size_t token() const { return token_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    token_ = start;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > 1'000'000) throw PnmError(std::string(what) + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) throw PnmError(std::string("expected ") + what, pos_);
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw PnmError("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  const std::vector<char>& bytes_;
  std::size_t pos_;
  std::size_t token_ = 0;
};

}  // namespace

Image8 decode_pnm(const std::vector<char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw PnmError("expected magic P5 or P6", 0);
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader r(bytes, 2);
  const std::size_t width = r.number("width");
  if (width == 0) throw PnmError("zero image width", r.token());
  const std::size_t height = r.number("height");
  if (height == 0) throw PnmError("zero image height", r.token());
  const std::size_t maxval = r.number("maxval");
  if (maxval != 255) {
    throw PnmError("unsupported maxval " + std::to_string(maxval) + " (only 255)", r.token());
  }
  r.single_space();
  const std::size_t start = r.pos();
  const std::size_t need = width * height * channels;
  if (bytes.size() - start < need) {
    throw PnmError("truncated payload: need " + std::to_string(need) + " bytes, have " +
                       std::to_string(bytes.size() - start),
                   bytes.size());
  }
  if (bytes.size() - start > need) throw PnmError("trailing bytes after payload", start + need);
  Image8 image(width, height, channels);
  for (std::size_t i = 0; i < need; ++i) image.values[i] = static_cast<std::uint8_t>(bytes[start + i]);
  return image;
}

std::vector<char> encode_pnm(const Image8& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw std::invalid_argument("encode_pnm: only 1 or 3 channels, got " +
                                std::to_string(image.channels));
  }
  if (image.width == 0 || image.height == 0) throw std::invalid_argument("encode_pnm: empty image");
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n255\n";
  std::vector<char> out(header.begin(), header.end());
  out.reserve(header.size() + image.values.size());
  for (std::uint8_t v : image.values) out.push_back(static_cast<char>(v));
  return out;
}

Image8 read_image(const std::filesystem::path& path) {
  try {
    return decode_pnm(read_file(path));
  } catch (const PnmError& e) {
    throw PnmError(e.detail(), e.offset(), path.string());
  }
}

void write_image(const std::filesystem::path& path, const Image8& image) {
  write_file_atomic(path, encode_pnm(image));
}

Image8 decode_mask(const std::vector<char>& bytes) {
  Image8 raw = decode_pnm(bytes);
  if (raw.channels != 1) throw PnmError("mask must be a P5 file", 0);
  const std::size_t payload = bytes.size() - raw.values.size();
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const std::uint8_t v = raw.values[i];
    if (v != 0 && v != 255) {
      throw PnmError("mask value " + std::to_string(v) + " is not 0 or 255", payload + i);
    }
    raw.values[i] = v ? 1 : 0;
  }
  return raw;
}

Image8 read_mask(const std::filesystem::path& path) {
  try {
    return decode_mask(read_file(path));
  } catch (const PnmError& e) {
    throw PnmError(e.detail(), e.offset(), path.string());
  }
}

void write_mask(const std::filesystem::path& path, const Image8& mask) {
  if (mask.channels != 1 || !is_binary_mask(mask)) {
    throw std::invalid_argument("write_mask: mask must be single-channel 0/1");
  }
  Image8 out = mask;
  for (std::uint8_t& v : out.values) v = v ? 255 : 0;
  write_image(path, out);
}

}  // namespace dscnet
