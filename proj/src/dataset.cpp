#include "dscnet/dataset.hpp"

#include <stdexcept>

#include "dscnet/fileio.hpp"
#include "dscnet/pnm.hpp"

namespace dscnet {

namespace fs = std::filesystem;

fs::path shadow_path(const fs::path& dir, const std::string& id) { return dir / (id + "_shadow.ppm"); }
fs::path mask_path(const fs::path& dir, const std::string& id) { return dir / (id + "_mask.pgm"); }
fs::path free_path(const fs::path& dir, const std::string& id) { return dir / (id + "_free.ppm"); }

void write_scene(const fs::path& dir, const LabeledScene& scene) {
  scene.validate();
  write_image(shadow_path(dir, scene.id), scene.shadow_image);
  write_mask(mask_path(dir, scene.id), scene.mask);
  if (scene.shadow_free) write_image(free_path(dir, scene.id), *scene.shadow_free);
}

Json scene_info_json(const SceneInfo& info, const std::string& id) {
  Json j{{"id", id},
         {"index", info.index},
         {"seed", info.seed},
         {"shape", to_string(info.shape)},
         {"texture", to_string(info.texture)},
         {"attenuation", info.attenuation}};
  j["perturbation"] = info.perturbation ? Json(*info.perturbation) : Json(nullptr);
  return j;
}

Json write_synthetic_dataset(const fs::path& dir, const SynthConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create dataset directory " + dir.string() + ": " + ec.message());
  }
  Json scenes = Json::array();
  for (std::size_t k = 0; k < cfg.count; ++k) {
    const GeneratedScene g = generate_scene(cfg, cfg.first_index + k);
    write_scene(dir, g.scene);
    scenes.push_back(scene_info_json(g.info, g.scene.id));
  }
  Json manifest{{"format", "dscnet-scenes"}, {"version", 1}, {"config", to_json(cfg)}, {"scenes", scenes}};
  write_json_file(dir / kManifestName, manifest);
  return manifest;
}

std::vector<LabeledScene> load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) throw IoError("no " + std::string(kManifestName) + " in " + dir.string());
  const Json manifest = read_json_file(manifest_path);
  if (!manifest.contains("scenes") || !manifest["scenes"].is_array()) {
    throw ConfigError("scenes", manifest_path.string() + ": missing scene list");
  }
  std::vector<LabeledScene> out;
  for (const Json& entry : manifest["scenes"]) {
    if (!entry.contains("id") || !entry["id"].is_string()) {
      throw ConfigError("scenes[].id", manifest_path.string() + ": scene without id");
    }
    LabeledScene s;
    s.id = entry["id"].get<std::string>();
    s.shadow_image = read_image(shadow_path(dir, s.id));
    s.mask = read_mask(mask_path(dir, s.id));
    if (fs::exists(free_path(dir, s.id))) s.shadow_free = read_image(free_path(dir, s.id));
    s.validate();
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::invalid_argument("dataset " + dir.string() + " has no scenes");
  return out;
}

}  // namespace dscnet
