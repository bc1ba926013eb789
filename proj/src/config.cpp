#include "ucf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace ucf {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
}

void RunConfig::validate() const {
  data.validate();
  model.validate(data.n_modalities);
  optimizer.validate();
  loss.validate();
  train.validate();
}

namespace {

// Reads the keys of one JSON object, remembering which ones were consumed so
// that leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      const json& v = j_.at(key);
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ConfigError(path_ + "." + key + ": expected a non-negative integer");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  const json* child(const std::string& key) {
    known_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!known_.count(item.key())) throw ConfigError("unknown key '" + path_ + "." + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

}  // namespace

json to_json(const DatasetConfig& c) {
  return {{"n_modalities", c.n_modalities},
          {"n_steps", c.n_steps},
          {"n_classes", c.n_classes},
          {"latent_dim", c.latent_dim},
          {"raw_dims", c.raw_dims},
          {"noise_sigma", c.noise_sigma},
          {"informative_masks", c.informative_masks},
          {"jitter_sigma", c.jitter_sigma},
          {"drift_amplitude", c.drift_amplitude},
          {"anchor_scale", c.anchor_scale},
          {"time_shift", c.time_shift},
          {"class_pairing", c.class_pairing},
          {"samples_per_class", c.samples_per_class},
          {"seed", c.seed},
          {"split", {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}}}};
}

DatasetConfig dataset_config_from_json(const json& j, const std::string& path) {
  DatasetConfig c;
  Section s(j, path);
  s.read("n_modalities", c.n_modalities);
  s.read("n_steps", c.n_steps);
  s.read("n_classes", c.n_classes);
  s.read("latent_dim", c.latent_dim);
  s.read("raw_dims", c.raw_dims);
  s.read("noise_sigma", c.noise_sigma);
  s.read("informative_masks", c.informative_masks);
  s.read("jitter_sigma", c.jitter_sigma);
  s.read("drift_amplitude", c.drift_amplitude);
  s.read("anchor_scale", c.anchor_scale);
  s.read("time_shift", c.time_shift);
  s.read("class_pairing", c.class_pairing);
  s.read("samples_per_class", c.samples_per_class);
  s.read("seed", c.seed);
  if (const json* split = s.child("split")) {
    Section sp(*split, s.path("split"));
    sp.read("train", c.split.train);
    sp.read("val", c.split.val);
    sp.read("test", c.split.test);
    sp.finish();
  }
  s.finish();
  return c;
}

json to_json(const ModelConfig& c) {
  return {{"encoder_variant", to_string(c.encoder_variant)},
          {"d", c.attention.d},
          {"heads", c.attention.heads},
          {"d_k", c.attention.d_k},
          {"d_v", c.attention.d_v},
          {"layers", c.attention.layers},
          {"feature_dims", c.feature_dims},
          {"main_modality", c.main_modality},
          {"enable_mcanet", c.enable_mcanet},
          {"active_modalities", c.active_modalities}};
}

ModelConfig model_config_from_json(const json& j, const std::string& path) {
  ModelConfig c;
  Section s(j, path);
  std::string variant = to_string(c.encoder_variant);
  s.read("encoder_variant", variant);
  try {
    c.encoder_variant = encoder_variant_from_string(variant);
  } catch (const ConfigError&) {
    throw ConfigError(s.path("encoder_variant") + ": unknown variant '" + variant + "' (sim, seq, full, none)");
  }
  s.read("d", c.attention.d);
  s.read("heads", c.attention.heads);
  s.read("d_k", c.attention.d_k);
  s.read("d_v", c.attention.d_v);
  s.read("layers", c.attention.layers);
  s.read("feature_dims", c.feature_dims);
  s.read("main_modality", c.main_modality);
  s.read("enable_mcanet", c.enable_mcanet);
  s.read("active_modalities", c.active_modalities);
  s.finish();
  return c;
}

json to_json(const OptimizerConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"momentum", c.momentum}, {"clip_norm", c.clip_norm}};
}

OptimizerConfig optimizer_config_from_json(const json& j, const std::string& path) {
  OptimizerConfig c;
  Section s(j, path);
  s.read("learning_rate", c.learning_rate);
  s.read("momentum", c.momentum);
  s.read("clip_norm", c.clip_norm);
  s.finish();
  return c;
}

json to_json(const LossConfig& c) { return {{"alpha", c.alpha}, {"clamp_eps", c.clamp_eps}}; }

LossConfig loss_config_from_json(const json& j, const std::string& path) {
  LossConfig c;
  Section s(j, path);
  s.read("alpha", c.alpha);
  s.read("clamp_eps", c.clamp_eps);
  s.finish();
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"patience", c.patience}};
}

TrainConfig train_config_from_json(const json& j, const std::string& path) {
  TrainConfig c;
  Section s(j, path);
  s.read("epochs", c.epochs);
  s.read("batch_size", c.batch_size);
  s.read("patience", c.patience);
  s.finish();
  return c;
}

json to_json(const RunConfig& c) {
  return {{"data", to_json(c.data)},         {"model", to_json(c.model)}, {"optimizer", to_json(c.optimizer)},
          {"loss", to_json(c.loss)},         {"train", to_json(c.train)}, {"seed", c.seed}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object at top level");
  std::set<std::string> known{"data", "model", "optimizer", "loss", "train", "seed"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown key '" + item.key() + "'");
  }
  if (j.contains("data")) c.data = dataset_config_from_json(j.at("data"));
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("optimizer")) c.optimizer = optimizer_config_from_json(j.at("optimizer"));
  if (j.contains("loss")) c.loss = loss_config_from_json(j.at("loss"));
  if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
  if (j.contains("seed")) {
    try {
      c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception&) {
      throw ConfigError("seed: wrong type (" + j.at("seed").dump() + ")");
    }
  }
  c.validate();
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return run_config_from_json(j);
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace ucf
