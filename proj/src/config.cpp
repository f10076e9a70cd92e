#include "dscnet/config.hpp"

#include <set>
#include <sstream>

#include "dscnet/fileio.hpp"

namespace dscnet {

ConfigError::ConfigError(const std::string& key_path, const std::string& message)
    : std::invalid_argument((key_path.empty() ? std::string("<root>") : key_path) + ": " + message),
      key_path_(key_path) {}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads known keys of one JSON object and rejects the rest.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void read(const std::string& key, std::size_t& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(at(key), "expected a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void read(const std::string& key, int& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void read(const std::string& key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename T>
  void read(const std::string& key, std::vector<T>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(at(key), "expected an array");
      std::vector<T> items;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const Json& e = (*v)[i];
        const std::string where = at(key) + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, double>) {
          if (!e.is_number()) throw ConfigError(where, "expected a number");
        } else {
          if (!e.is_number_unsigned()) throw ConfigError(where, "expected a non-negative integer");
        }
        items.push_back(e.get<T>());
      }
      out = std::move(items);
    }
  }

  // Enumerations parsed from strings; parse errors carry the key path.
  template <typename T, typename Parse>
  void read_enum(const std::string& key, T& out, Parse parse) {
    std::string s;
    read(key, s);
    if (!find(key)) return;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(at(key), e.what());
    }
  }

  template <typename T, typename Parse>
  void read_enum_list(const std::string& key, std::vector<T>& out, Parse parse) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(at(key), "expected an array of strings");
      std::vector<T> items;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string where = at(key) + "[" + std::to_string(i) + "]";
        if (!(*v)[i].is_string()) throw ConfigError(where, "expected a string");
        try {
          items.push_back(parse((*v)[i].get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(where, e.what());
        }
      }
      out = std::move(items);
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

AttentionInput parse_attention_input(const std::string& s) {
  if (s == "round_output") return AttentionInput::round_output;
  if (s == "module_input") return AttentionInput::module_input;
  throw std::invalid_argument("unknown attention input '" + s + "' (expected round_output or module_input)");
}

std::string to_string(AttentionInput a) {
  return a == AttentionInput::round_output ? "round_output" : "module_input";
}

// Re-throws validation failures of a finished section under its key path.
template <typename F>
void validate_section(const std::string& path, F&& validate) {
  try {
    validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

Json to_json(const SynthConfig& c) {
  Json shapes = Json::array(), textures = Json::array();
  for (ShapeFamily s : c.shapes) shapes.push_back(to_string(s));
  for (Texture t : c.textures) textures.push_back(to_string(t));
  return Json{{"resolution", c.resolution},
              {"count", c.count},
              {"first_index", c.first_index},
              {"shapes", shapes},
              {"attenuation_min", c.attenuation_min},
              {"attenuation_max", c.attenuation_max},
              {"soft_edge", c.soft_edge},
              {"textures", textures},
              {"perturb", c.perturb},
              {"perturb_gain", c.perturb_gain},
              {"perturb_mix", c.perturb_mix},
              {"perturb_bias", c.perturb_bias},
              {"noise", c.noise},
              {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const Json& j, const std::string& path) {
  SynthConfig c;
  Fields f(j, path);
  f.read("resolution", c.resolution);
  f.read("count", c.count);
  f.read("first_index", c.first_index);
  f.read_enum_list("shapes", c.shapes, parse_shape_family);
  f.read("attenuation_min", c.attenuation_min);
  f.read("attenuation_max", c.attenuation_max);
  f.read("soft_edge", c.soft_edge);
  f.read_enum_list("textures", c.textures, parse_texture);
  f.read("perturb", c.perturb);
  f.read("perturb_gain", c.perturb_gain);
  f.read("perturb_mix", c.perturb_mix);
  f.read("perturb_bias", c.perturb_bias);
  f.read("noise", c.noise);
  std::size_t seed = c.seed;
  f.read("seed", seed);
  c.seed = seed;
  f.finish();
  validate_section(path, [&] { c.validate(); });
  return c;
}

Json to_json(const NetworkConfig& c) {
  return Json{{"variant", to_string(c.variant)},
              {"scale_channels", c.scale_channels},
              {"convs_per_scale", c.convs_per_scale},
              {"dsc_on_first_scale", c.dsc_on_first_scale},
              {"rounds", c.rounds},
              {"share_attention", c.share_attention},
              {"share_recurrence", c.share_recurrence},
              {"reduce_factor", c.reduce_factor},
              {"attention_input", to_string(c.attention_input)},
              {"mlif_channels", c.mlif_channels},
              {"init_std", c.init_std},
              {"color_space", to_string(c.color_space)},
              {"residual", c.residual}};
}

NetworkConfig network_config_from_json(const Json& j, Task task, const std::string& path) {
  NetworkConfig c;
  c.task = task;
  Fields f(j, path);
  f.read_enum("variant", c.variant, parse_variant);
  f.read("scale_channels", c.scale_channels);
  f.read("convs_per_scale", c.convs_per_scale);
  f.read("dsc_on_first_scale", c.dsc_on_first_scale);
  f.read("rounds", c.rounds);
  f.read("share_attention", c.share_attention);
  f.read("share_recurrence", c.share_recurrence);
  f.read("reduce_factor", c.reduce_factor);
  f.read_enum("attention_input", c.attention_input, parse_attention_input);
  f.read("mlif_channels", c.mlif_channels);
  f.read("init_std", c.init_std);
  f.read_enum("color_space", c.color_space, parse_color_space);
  f.read("residual", c.residual);
  f.finish();
  validate_section(path, [&] { c.validate(); });
  return c;
}

Json to_json(const TrainOptions& o) {
  return Json{{"iterations", o.iterations},
              {"lr", o.lr},
              {"momentum", o.momentum},
              {"weight_decay", o.weight_decay},
              {"beta1", o.beta1},
              {"beta2", o.beta2},
              {"milestones", o.milestones},
              {"gamma", o.gamma},
              {"accumulate", o.accumulate},
              {"head_weights",
               Json{{"per_scale", o.head_weights.per_scale},
                    {"mlif", o.head_weights.mlif},
                    {"fusion", o.head_weights.fusion}}}};
}

TrainOptions train_options_from_json(const Json& j, const std::string& path) {
  TrainOptions o;
  Fields f(j, path);
  f.read("iterations", o.iterations);
  f.read("lr", o.lr);
  f.read("momentum", o.momentum);
  f.read("weight_decay", o.weight_decay);
  f.read("beta1", o.beta1);
  f.read("beta2", o.beta2);
  f.read("milestones", o.milestones);
  f.read("gamma", o.gamma);
  f.read("accumulate", o.accumulate);
  if (const Json* hw = f.find("head_weights")) {
    Fields h(*hw, join(path, "head_weights"));
    h.read("per_scale", o.head_weights.per_scale);
    h.read("mlif", o.head_weights.mlif);
    h.read("fusion", o.head_weights.fusion);
    h.finish();
  }
  f.finish();
  validate_section(path, [&] { o.validate(); });
  return o;
}

SynthJob synth_job_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("", "expected an object");
  Json scenes = j;
  SynthJob job;
  if (auto it = j.find("splits"); it != j.end()) {
    Fields f(*it, "splits");
    f.read("train", job.train_count);
    f.read("test", job.test_count);
    f.finish();
    scenes.erase("splits");
  }
  job.scenes = synth_config_from_json(scenes, "");
  return job;
}

Json to_json(const SynthJob& job) {
  Json j = to_json(job.scenes);
  if (job.train_count || job.test_count) {
    j["splits"] = Json{{"train", job.train_count}, {"test", job.test_count}};
  }
  return j;
}

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  Fields f(j, "");
  f.read_enum("task", c.task, parse_task);
  std::size_t seed = c.seed;
  f.read("seed", seed);
  c.seed = seed;
  std::string dataset, output = c.output.string();
  f.read("dataset", dataset);
  f.read("output", output);
  if (dataset.empty()) throw ConfigError("dataset", "a dataset directory is required");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  c.dataset = resolve(dataset);
  c.output = resolve(output);
  f.read("use_color_transfer", c.use_color_transfer);
  c.network.task = c.task;
  if (const Json* n = f.find("network")) c.network = network_config_from_json(*n, c.task, "network");
  if (const Json* t = f.find("train")) c.train = train_options_from_json(*t, "train");
  f.finish();
  if (c.use_color_transfer && c.task != Task::removal) {
    throw ConfigError("use_color_transfer", "only applies to the removal task");
  }
  return c;
}

Json to_json(const RunConfig& c) {
  return Json{{"task", to_string(c.task)},
              {"seed", c.seed},
              {"dataset", c.dataset.string()},
              {"output", c.output.string()},
              {"use_color_transfer", c.use_color_transfer},
              {"network", to_json(c.network)},
              {"train", to_json(c.train)}};
}

Json read_json_file(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_file(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError("", path.string() + ": invalid JSON at byte " + std::to_string(e.byte) +
                              ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

Json model_sidecar(const NetworkConfig& network, std::uint64_t seed) {
  return Json{{"format", "dscnet-model"},
              {"version", 1},
              {"task", to_string(network.task)},
              {"seed", seed},
              {"network", to_json(network)}};
}

NetworkConfig network_from_sidecar(const Json& j) {
  Fields f(j, "");
  std::string format;
  int version = 0;
  Task task = Task::detection;
  std::size_t seed = 0;
  f.read("format", format);
  f.read("version", version);
  f.read_enum("task", task, parse_task);
  f.read("seed", seed);
  if (format != "dscnet-model") throw ConfigError("format", "not a model description");
  if (version != 1) throw ConfigError("version", "unsupported version " + std::to_string(version));
  const Json* n = f.find("network");
  if (!n) throw ConfigError("network", "missing");
  NetworkConfig c = network_config_from_json(*n, task, "network");
  f.finish();
  return c;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p.replace_extension(".json");
  return p;
}

}  // namespace dscnet
