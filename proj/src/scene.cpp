#include "dscnet/scene.hpp"

#include <stdexcept>

namespace dscnet {

void LabeledScene::validate() const {
  const std::string where = "scene '" + id + "': ";
  if (shadow_image.channels != 3 || shadow_image.empty()) {
    throw std::invalid_argument(where + "shadow image must be a non-empty 3-channel raster");
  }
  if (mask.channels != 1 || !mask.same_size(shadow_image)) {
    throw std::invalid_argument(where + "mask must be 1-channel and match the shadow image");
  }
  if (!is_binary_mask(mask)) throw std::invalid_argument(where + "mask is not binary");
  if (shadow_free) {
    if (shadow_free->channels != 3 || !shadow_free->same_size(shadow_image)) {
      throw std::invalid_argument(where + "shadow-free image does not match the shadow image");
    }
  }
}

}  // namespace dscnet
