#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "ucf/data.hpp"
#include "ucf/losses.hpp"
#include "ucf/model.hpp"
#include "ucf/optim.hpp"

namespace ucf {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 8;
  // Epochs without a validation improvement before stopping; 0 disables.
  std::size_t patience = 30;

  void validate() const;
};

struct RunConfig {
  DatasetConfig data;
  ModelConfig model;
  OptimizerConfig optimizer;
  LossConfig loss;
  TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const;
};

// Serialization writes every field. Parsing is strict: unknown keys and
// wrongly typed values raise ConfigError naming the dotted key path; missing
// keys keep their defaults.
nlohmann::json to_json(const DatasetConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const OptimizerConfig& c);
nlohmann::json to_json(const LossConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const RunConfig& c);

DatasetConfig dataset_config_from_json(const nlohmann::json& j, const std::string& path = "data");
ModelConfig model_config_from_json(const nlohmann::json& j, const std::string& path = "model");
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j, const std::string& path = "optimizer");
LossConfig loss_config_from_json(const nlohmann::json& j, const std::string& path = "loss");
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& path = "train");
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& file);

}  // namespace ucf
