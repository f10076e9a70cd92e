#pragma once

#include <optional>
#include <string>

#include "dscnet/image.hpp"

namespace dscnet {

struct LabeledScene {
  std::string id;
  Image8 shadow_image;                 // sRGB, 3 channels
  Image8 mask;                         // 1 channel, 1 = shadow
  std::optional<Image8> shadow_free;   // sRGB, 3 channels

  /// Throws std::invalid_argument when rasters disagree in size or the mask
  /// is not strictly binary.
  void validate() const;
};

}  // namespace dscnet
