#pragma once

#include <filesystem>
#include <vector>

#include "dscnet/config.hpp"
#include "dscnet/scene.hpp"
#include "dscnet/synth.hpp"

namespace dscnet {

inline constexpr const char* kManifestName = "manifest.json";

std::filesystem::path shadow_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path mask_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path free_path(const std::filesystem::path& dir, const std::string& id);

/// Writes cfg.count scenes starting at cfg.first_index plus manifest.json.
/// Returns the manifest.
Json write_synthetic_dataset(const std::filesystem::path& dir, const SynthConfig& cfg);

void write_scene(const std::filesystem::path& dir, const LabeledScene& scene);

/// Loads the scenes listed in the directory's manifest and validates them.
std::vector<LabeledScene> load_dataset(const std::filesystem::path& dir);

Json scene_info_json(const SceneInfo& info, const std::string& id);

}  // namespace dscnet
