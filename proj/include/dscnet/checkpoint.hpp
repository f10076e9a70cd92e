#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dscnet/tensor.hpp"

namespace dscnet {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Little-endian layout:
//   "DSCK" | version u32 | count u32 |
//   per tensor: name_len u16, name bytes, rank u8, extents u32 x rank, f32 x volume
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<char> encode_checkpoint(const NamedTensors& tensors);
NamedTensors decode_checkpoint(const std::vector<char>& bytes);

/// Writes atomically (temp file + rename).
void save_checkpoint(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint values into same-named tensors. Every destination must
/// be present with a matching shape.
void assign_from_checkpoint(const NamedTensors& source, NamedTensors& destination);

}  // namespace dscnet
