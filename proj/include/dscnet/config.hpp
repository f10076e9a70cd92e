#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dscnet/network.hpp"
#include "dscnet/synth.hpp"
#include "dscnet/training.hpp"

namespace dscnet {

using Json = nlohmann::ordered_json;

/// Invalid configuration; the message starts with the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key_path, const std::string& message);
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

Json to_json(const SynthConfig& c);
Json to_json(const NetworkConfig& c);
Json to_json(const TrainOptions& o);

/// Missing keys keep their defaults; unknown keys are rejected.
SynthConfig synth_config_from_json(const Json& j, const std::string& path = "");
NetworkConfig network_config_from_json(const Json& j, Task task, const std::string& path = "network");
TrainOptions train_options_from_json(const Json& j, const std::string& path = "train");

/// Input of the synth command: scene settings plus an optional split table.
struct SynthJob {
  SynthConfig scenes;
  std::size_t train_count = 0;  // 0 with test_count 0: write scenes.count into the output root
  std::size_t test_count = 0;
};

SynthJob synth_job_from_json(const Json& j);
Json to_json(const SynthJob& job);

/// Input of the train command.
struct RunConfig {
  Task task = Task::detection;
  std::uint64_t seed = 7;
  std::filesystem::path dataset;
  std::filesystem::path output = "run";
  bool use_color_transfer = false;
  NetworkConfig network;
  TrainOptions train;
};

/// Relative paths are resolved against `base_dir`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const RunConfig& c);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Network description stored next to a checkpoint so it can be rebuilt.
Json model_sidecar(const NetworkConfig& network, std::uint64_t seed);
NetworkConfig network_from_sidecar(const Json& j);
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint);

}  // namespace dscnet
