#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "dscnet/color_transfer.hpp"
#include "dscnet/config.hpp"
#include "dscnet/evaluation.hpp"
#include "dscnet/network.hpp"
#include "dscnet/training.hpp"

namespace dscnet {

struct SynthCommand {
  std::filesystem::path config;  // empty: defaults
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};

/// Writes the dataset (or train/ and test/ splits) and returns the resolved job.
SynthJob cmd_synth(const SynthCommand& cmd, std::ostream& log);

struct TrainCommand {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<Task> task;
  std::optional<bool> use_color_transfer;
  std::size_t log_every = 0;  // 0: no per-iteration progress lines
};

struct TrainResult {
  RunConfig config;
  LossTrace trace;
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
};

/// Output directory receives model.dsck, model.json, loss.csv,
/// config.resolved.json and, for color-compensated removal, transfers/<id>.json.
TrainResult cmd_train(const TrainCommand& cmd, std::ostream& log);

struct EvalCommand {
  std::filesystem::path checkpoint;  // unused with baseline
  std::filesystem::path dataset;
  std::optional<Task> task;
  std::optional<std::filesystem::path> out;
  /// Detection: ground-truth masks scored against themselves.
  /// Removal: the shadow image scored as the prediction.
  bool baseline = false;
  RemovalTarget target = RemovalTarget::shadow_free;
  std::optional<std::size_t> threads;  // default from DSC_THREADS
};

struct EvalResult {
  Task task = Task::detection;
  std::vector<SampleMetrics> samples;
  EvalSummary summary;
};

EvalResult cmd_eval(const EvalCommand& cmd, std::ostream& log);
Json summary_json(const EvalResult& r);

struct FitTransferCommand {
  std::filesystem::path shadow;
  std::filesystem::path shadow_free;
  std::filesystem::path mask;  // shadow mask; the fit uses its complement
  std::filesystem::path out;   // transfer JSON
  std::optional<std::filesystem::path> adjusted;
};

TransferMatrix cmd_fit_transfer(const FitTransferCommand& cmd, std::ostream& log);
Json transfer_json(const TransferMatrix& t);
TransferMatrix transfer_from_json(const Json& j);

struct PredictCommand {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path out;  // mask PGM for detection, PPM for removal
};

void cmd_predict(const PredictCommand& cmd, std::ostream& log);

/// Rebuilds a network from a checkpoint and its sidecar description.
NetworkState load_network(const std::filesystem::path& checkpoint);

}  // namespace dscnet
