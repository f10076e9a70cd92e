#include "dscnet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>

#include "dscnet/fileio.hpp"

namespace dscnet {

namespace {

template <typename T>
void put_le(std::vector<char>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu));
  }
}

class Reader {
 public:
  explicit Reader(const std::vector<char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string get_string(std::size_t n) {
    need(n, "tensor name");
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_) + " reading " +
                            what);
    }
  }

  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<char> encode_checkpoint(const NamedTensors& tensors) {
  std::vector<char> out{'D', 'S', 'C', 'K'};
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw CheckpointError("tensor name too long: " + name.substr(0, 32) + "...");
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    if (t.rank() > 255) throw CheckpointError("tensor rank exceeds 255: " + name);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t e : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (double v : t.data()) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

NamedTensors decode_checkpoint(const std::vector<char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "DSCK", 4) != 0) {
    throw CheckpointError("not a checkpoint: missing DSCK magic at byte 0");
  }
  Reader r(bytes);
  (void)r.get<std::uint32_t>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>("name length");
    std::string name = r.get_string(name_len);
    const auto rank = r.get<std::uint8_t>("rank");
    Shape shape;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const auto e = r.get<std::uint32_t>("extent");
      if (e == 0) {
        throw CheckpointError("zero extent in tensor '" + name + "' at byte " +
                              std::to_string(r.position() - 4));
      }
      shape.push_back(e);
    }
    std::vector<double> values(shape_volume(shape));
    for (double& v : values) v = std::bit_cast<float>(r.get<std::uint32_t>("tensor data"));
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) {
    throw CheckpointError("trailing bytes after tensor " + std::to_string(count) + " at byte " +
                          std::to_string(r.position()));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& tensors) {
  write_file_atomic(path, encode_checkpoint(tensors));
}

NamedTensors load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

void assign_from_checkpoint(const NamedTensors& source, NamedTensors& destination) {
  for (auto& [name, dst] : destination) {
    const Tensor* src = nullptr;
    for (const auto& [sname, st] : source) {
      if (sname == name) src = &st;
    }
    if (!src) throw CheckpointError("checkpoint lacks tensor '" + name + "'");
    if (src->shape() != dst.shape()) {
      throw CheckpointError("tensor '" + name + "' has shape " + shape_string(src->shape()) +
                            ", expected " + shape_string(dst.shape()));
    }
    std::copy(src->data().begin(), src->data().end(), dst.data().begin());
  }
}

}  // namespace dscnet
