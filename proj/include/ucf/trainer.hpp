#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucf/config.hpp"
#include "ucf/model.hpp"
#include "ucf/optim.hpp"

namespace ucf {

// Raised when a training loss stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalResult {
  std::size_t count = 0;
  double loss = 0.0;  // mean total loss
  double accuracy = 0.0;
  // Mean cosine similarity between main and each sub-modality on the
  // encoded grid; empty with a single active modality.
  std::vector<double> similarity;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_similarity = 0.0;  // mean over sub-modalities, 0 with one modality
};

struct TrainRun {
  RunConfig config;
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;  // 0 means the initial weights were kept
  EvalResult test;
};

EvalResult evaluate(const Model& model, const Dataset& data, Partition part, const LossConfig& loss);

// Mean cross-modal cosine similarity per sub-modality on encoder outputs.
// Throws ContractError with fewer than two active modalities.
std::vector<double> measure_alignment(const Model& model, const Dataset& data, Partition part);

// Mini-batch SGD with momentum on the training split. The batch order is
// reshuffled every epoch from `config.seed`; the weights with the best
// validation accuracy are kept and evaluated on the test split.
TrainRun train(const Dataset& data, Model& model, const RunConfig& config);

// Builds data and model from the config and trains.
TrainRun run_experiment(const RunConfig& config);

// Finite-difference check of the total loss of one sample over every
// trainable parameter.
GradCheckResult gradcheck_model(const RunConfig& config, double eps = 1e-5);

// Binary layout: "UCFCKPT1", u64 header length, JSON header {config,
// parameters: [{name, shape}]}, then every parameter's values as
// little-endian float64 in header order.
void save_checkpoint(const std::filesystem::path& file, const Model& model, const RunConfig& config);

struct Checkpoint {
  RunConfig config;
  Model model;
};
Checkpoint load_checkpoint(const std::filesystem::path& file);

nlohmann::json to_json(const EvalResult& r);
nlohmann::json to_json(const EpochMetrics& m);

// First line carries the resolved config; then one object per epoch and a
// final summary line.
std::string metrics_jsonl(const TrainRun& run);
// Comment line with the config, then a header row and one row per true class.
std::string confusion_csv(const TrainRun& run);

}  // namespace ucf
