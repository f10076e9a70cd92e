#include <CLI11.hpp>

#include <iostream>

#include "dscnet/commands.hpp"

namespace {

std::optional<dscnet::Task> task_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return dscnet::parse_task(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction-aware spatial context networks for shadow detection and removal"};
  app.require_subcommand(1);

  std::string config, out, task, checkpoint, dataset, target = "free";
  std::uint64_t seed = 0;
  bool use_transfer = false, baseline = false;
  std::size_t log_every = 0, threads = 0;

  auto* synth = app.add_subcommand("synth", "generate a synthetic shadow dataset");
  synth->add_option("--config", config, "synth JSON config");
  synth->add_option("--seed", seed, "override the scene seed");
  synth->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a detection or removal network");
  train->add_option("--config", config, "run JSON config")->required();
  train->add_option("--seed", seed, "override the run seed");
  train->add_option("--out", out, "override the output directory");
  train->add_option("--task", task, "detect or remove")->check(CLI::IsMember({"detect", "remove", "detection", "removal"}));
  train->add_option("--use-color-transfer", use_transfer, "train against color-compensated targets");
  train->add_option("--log-every", log_every, "print the loss every N iterations");

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint, "model.dsck written by train");
  eval->add_option("--dataset", dataset, "dataset directory")->required();
  eval->add_option("--task", task, "detect or remove")->check(CLI::IsMember({"detect", "remove", "detection", "removal"}));
  eval->add_option("--out", out, "directory for metrics.csv and summary.json");
  eval->add_flag("--baseline", baseline, "score ground truth (detect) or the unchanged input (remove)");
  eval->add_option("--target", target, "removal target: free or transfer")->check(CLI::IsMember({"free", "transfer"}));
  eval->add_option("--threads", threads, "worker count (default DSC_THREADS or 1)");

  std::string shadow, free_image, mask, adjusted;
  auto* fit = app.add_subcommand("fit-transfer", "fit the 3x4 color transfer of an image pair");
  fit->add_option("--shadow", shadow, "shadow image (P6)")->required();
  fit->add_option("--free", free_image, "shadow-free image (P6)")->required();
  fit->add_option("--mask", mask, "shadow mask (P5, 0/255)")->required();
  fit->add_option("--out", out, "transfer JSON path")->required();
  fit->add_option("--adjusted", adjusted, "write the compensated shadow-free image here");

  std::string input;
  auto* predict = app.add_subcommand("predict", "run a checkpoint on one image");
  predict->add_option("--checkpoint", checkpoint, "model.dsck written by train")->required();
  predict->add_option("--input", input, "input image (P6)")->required();
  predict->add_option("--out", out, "output mask (P5) or image (P6)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      dscnet::SynthCommand cmd{config, std::nullopt, out};
      if (synth->count("--seed")) cmd.seed = seed;
      dscnet::cmd_synth(cmd, std::cout);
    } else if (train->parsed()) {
      dscnet::TrainCommand cmd;
      cmd.config = config;
      if (train->count("--seed")) cmd.seed = seed;
      if (!out.empty()) cmd.out = out;
      cmd.task = task_flag(task);
      if (train->count("--use-color-transfer")) cmd.use_color_transfer = use_transfer;
      cmd.log_every = log_every;
      dscnet::cmd_train(cmd, std::cout);
    } else if (eval->parsed()) {
      dscnet::EvalCommand cmd;
      cmd.checkpoint = checkpoint;
      cmd.dataset = dataset;
      cmd.task = task_flag(task);
      if (!out.empty()) cmd.out = out;
      cmd.baseline = baseline;
      cmd.target = target == "transfer" ? dscnet::RemovalTarget::transferred : dscnet::RemovalTarget::shadow_free;
      if (threads > 0) cmd.threads = threads;
      if (!baseline && checkpoint.empty()) throw std::invalid_argument("eval: --checkpoint is required");
      dscnet::cmd_eval(cmd, std::cout);
    } else if (fit->parsed()) {
      dscnet::FitTransferCommand cmd{shadow, free_image, mask, out, std::nullopt};
      if (!adjusted.empty()) cmd.adjusted = adjusted;
      dscnet::cmd_fit_transfer(cmd, std::cout);
    } else if (predict->parsed()) {
      dscnet::cmd_predict({checkpoint, input, out}, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
