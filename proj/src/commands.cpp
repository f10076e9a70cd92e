#include "dscnet/commands.hpp"

#include <stdexcept>

#include "dscnet/checkpoint.hpp"
#include "dscnet/dataset.hpp"
#include "dscnet/fileio.hpp"
#include "dscnet/pnm.hpp"

namespace dscnet {

namespace fs = std::filesystem;

namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

SynthJob cmd_synth(const SynthCommand& cmd, std::ostream& log) {
  SynthJob job;
  if (!cmd.config.empty()) job = synth_job_from_json(read_json_file(cmd.config));
  if (cmd.seed) job.scenes.seed = *cmd.seed;
  if (cmd.out.empty()) throw std::invalid_argument("synth: an output directory is required");
  if (job.train_count == 0 && job.test_count == 0) {
    write_synthetic_dataset(cmd.out, job.scenes);
    log << "wrote " << job.scenes.count << " scenes to " << cmd.out.string() << "\n";
  } else {
    // Test scenes continue the index sequence, so the splits never overlap.
    SynthConfig train = job.scenes, test = job.scenes;
    train.count = job.train_count;
    test.first_index = job.scenes.first_index + job.train_count;
    test.count = job.test_count;
    if (train.count) write_synthetic_dataset(cmd.out / "train", train);
    if (test.count) write_synthetic_dataset(cmd.out / "test", test);
    log << "wrote " << train.count << " train and " << test.count << " test scenes to "
        << cmd.out.string() << "\n";
  }
  return job;
}

TrainResult cmd_train(const TrainCommand& cmd, std::ostream& log) {
  if (cmd.config.empty()) throw std::invalid_argument("train: --config is required");
  const Json raw = read_json_file(cmd.config);
  TrainResult result;
  RunConfig& c = result.config;
  c = run_config_from_json(raw, cmd.config.parent_path());
  if (cmd.seed) c.seed = *cmd.seed;
  if (cmd.out) c.output = *cmd.out;
  if (cmd.task) {
    c.task = *cmd.task;
    c.network.task = *cmd.task;
  }
  if (cmd.use_color_transfer) c.use_color_transfer = *cmd.use_color_transfer;
  if (c.use_color_transfer && c.task != Task::removal) {
    throw ConfigError("use_color_transfer", "only applies to the removal task");
  }

  const Json resolved = to_json(c);
  log << "resolved config:\n" << resolved.dump(2) << "\n";
  ensure_directory(c.output);
  write_json_file(c.output / "config.resolved.json", resolved);

  const std::vector<LabeledScene> scenes = load_dataset(c.dataset);
  NetworkState state = NetworkState::create(c.network, c.seed);
  ProgressFn progress;
  if (cmd.log_every > 0) {
    progress = [&](const LossRecord& r) {
      if ((r.iteration + 1) % cmd.log_every == 0) {
        log << "iteration " << r.iteration + 1 << " loss " << r.total << "\n";
      }
    };
  }
  if (c.task == Task::detection) {
    result.trace = train_detection(scenes, state, c.train, c.seed, progress);
  } else {
    std::vector<TransferMatrix> transfers;
    result.trace = train_removal(scenes, state, c.train, c.seed, c.use_color_transfer, &transfers, progress);
    if (c.use_color_transfer) {
      const fs::path dir = c.output / "transfers";
      ensure_directory(dir);
      for (std::size_t i = 0; i < scenes.size(); ++i) {
        write_json_file(dir / (scenes[i].id + ".json"), transfer_json(transfers[i]));
      }
      log << "fitted " << transfers.size() << " color transfers\n";
    }
  }

  result.checkpoint = c.output / "model.dsck";
  result.loss_csv = c.output / "loss.csv";
  save_checkpoint(result.checkpoint, state.named_tensors());
  write_json_file(sidecar_path(result.checkpoint), model_sidecar(state.config, c.seed));
  write_file_atomic(result.loss_csv, loss_trace_csv(result.trace));
  log << "trained " << result.trace.size() << " iterations, final loss "
      << result.trace.back().total << "\n";
  return result;
}

NetworkState load_network(const fs::path& checkpoint) {
  const fs::path sidecar = sidecar_path(checkpoint);
  if (!fs::exists(sidecar)) {
    throw IoError("missing model description " + sidecar.string() + " next to the checkpoint");
  }
  const NetworkConfig config = network_from_sidecar(read_json_file(sidecar));
  NetworkState state = NetworkState::create(config, 0);
  NamedTensors dest = state.named_tensors();
  assign_from_checkpoint(load_checkpoint(checkpoint), dest);
  return state;
}

Json summary_json(const EvalResult& r) {
  Json j{{"task", to_string(r.task)}, {"samples", r.summary.samples}};
  if (r.task == Task::detection) {
    j["accuracy"] = optional_number(r.summary.accuracy);
    j["ber"] = r.summary.ber ? Json(r.summary.ber->value) : Json(nullptr);
    j["ber_partial"] = r.summary.ber ? r.summary.ber->partial : false;
    j["mean_image_ber"] = optional_number(r.summary.mean_image_ber);
  } else {
    j["rmse_all"] = optional_number(r.summary.rmse_all);
    j["rmse_shadow"] = optional_number(r.summary.rmse_shadow);
    j["rmse_nonshadow"] = optional_number(r.summary.rmse_nonshadow);
  }
  return j;
}

EvalResult cmd_eval(const EvalCommand& cmd, std::ostream& log) {
  const std::vector<LabeledScene> scenes = load_dataset(cmd.dataset);
  const std::size_t threads = cmd.threads ? *cmd.threads : eval_threads_from_env();
  EvalResult r;
  if (cmd.baseline) {
    if (!cmd.task) throw std::invalid_argument("eval: --baseline needs --task");
    r.task = *cmd.task;
    r.samples = r.task == Task::detection ? evaluate_mask_identity(scenes)
                                          : evaluate_removal_baseline(scenes, cmd.target);
  } else {
    const NetworkState state = load_network(cmd.checkpoint);
    r.task = state.config.task;
    if (cmd.task && *cmd.task != r.task) {
      throw std::invalid_argument("eval: checkpoint is a " + to_string(r.task) +
                                  " network but --task asks for " + to_string(*cmd.task));
    }
    r.samples = r.task == Task::detection ? evaluate_detection(state, scenes, threads)
                                          : evaluate_removal(state, scenes, cmd.target, threads);
  }
  r.summary = summarize(r.samples);
  const Json summary = summary_json(r);
  log << summary.dump(2) << "\n";
  if (cmd.out) {
    ensure_directory(*cmd.out);
    write_file_atomic(*cmd.out / "metrics.csv", metrics_csv(r.samples));
    write_json_file(*cmd.out / "summary.json", summary);
  }
  return r;
}

Json transfer_json(const TransferMatrix& t) {
  return Json{{"matrix", t.m}, {"residual", t.residual}, {"sample_count", t.sample_count}};
}

TransferMatrix transfer_from_json(const Json& j) {
  TransferMatrix t;
  if (!j.is_object() || !j.contains("matrix") || !j["matrix"].is_array() || j["matrix"].size() != 12) {
    throw ConfigError("matrix", "expected 12 numbers");
  }
  for (std::size_t i = 0; i < 12; ++i) {
    if (!j["matrix"][i].is_number()) throw ConfigError("matrix[" + std::to_string(i) + "]", "expected a number");
    t.m[i] = j["matrix"][i].get<double>();
  }
  if (j.contains("residual")) t.residual = j["residual"].get<double>();
  if (j.contains("sample_count")) t.sample_count = j["sample_count"].get<std::size_t>();
  return t;
}

TransferMatrix cmd_fit_transfer(const FitTransferCommand& cmd, std::ostream& log) {
  const Image8 shadow = read_image(cmd.shadow);
  const Image8 free = read_image(cmd.shadow_free);
  const Image8 mask = read_mask(cmd.mask);
  if (shadow.channels != 3 || free.channels != 3) {
    throw std::invalid_argument("fit-transfer: images must be P6 color files");
  }
  if (!shadow.same_size(free) || !mask.same_size(shadow)) {
    throw std::invalid_argument("fit-transfer: image and mask sizes differ");
  }
  const TransferMatrix t = fit_transfer(to_float(shadow), to_float(free), invert_mask(mask));
  const Json j = transfer_json(t);
  if (!cmd.out.empty()) write_json_file(cmd.out, j);
  if (cmd.adjusted) write_image(*cmd.adjusted, quantize(apply_transfer(to_float(free), t)));
  log << j.dump(2) << "\n";
  return t;
}

void cmd_predict(const PredictCommand& cmd, std::ostream& log) {
  const NetworkState state = load_network(cmd.checkpoint);
  const Image8 input = read_image(cmd.input);
  if (input.channels != 3) throw std::invalid_argument("predict: input must be a P6 color image");
  if (state.config.task == Task::detection) {
    const MaskPrediction p = predict_mask(state, to_float(input));
    write_mask(cmd.out, p.mask);
    log << "wrote mask with " << count_set(p.mask) << " shadow pixels to " << cmd.out.string() << "\n";
  } else {
    const ShadowFreePrediction p = predict_shadow_free(state, to_float(input));
    write_image(cmd.out, p.rgb);
    log << "wrote shadow-free image to " << cmd.out.string() << "\n";
  }
}

}  // namespace dscnet
