#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ucf/data.hpp"
#include "ucf/encoder.hpp"
#include "ucf/fusion.hpp"
#include "ucf/losses.hpp"

namespace ucf {

struct ModelConfig {
  EncoderVariant encoder_variant = EncoderVariant::sim;
  AttentionConfig attention;
  // Backbone output width per modality.
  std::vector<std::size_t> feature_dims{64, 32, 48};
  // Global modality index; falls back to the first active modality when inactive.
  std::size_t main_modality = 0;
  // Off: the N·T·d grid is flattened straight into the classifier and the
  // contrastive term is dropped.
  bool enable_mcanet = true;
  // Empty means every modality is active.
  std::vector<bool> active_modalities;

  void validate(std::size_t dataset_modalities) const;
  std::vector<std::size_t> active_indices(std::size_t dataset_modalities) const;
};

// Backbones → projection → encoder → fusion → classifier for the active
// modalities of one dataset layout. Parameters live in `store`.
struct Model {
  ModelConfig config;
  std::size_t steps = 0;
  std::size_t classes = 0;
  std::vector<std::size_t> active;  // dataset modality index per grid row block
  ParameterStore store;
  std::vector<ToyBackbone> backbones;
  ProjectionWeights projection;
  Encoder encoder;
  PositionalTable table;
  ClassifierHead head;
  ModalityRoles roles;  // in grid (active-list) indices

  Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  static Model create(const ModelConfig& config, const DatasetConfig& data, std::uint64_t seed);

  // Encoder actually used: the temporal-only (joint at N=1) encoder when a
  // single modality is active.
  EncoderVariant effective_variant() const;
};

struct ForwardResult {
  Var logits;                         // [n_cls]
  Var probs;                          // O, [n_cls]
  EmbeddingGrid initial;              // Z⁰
  EmbeddingGrid encoded;              // C
  std::optional<FusionOutput> fusion; // absent when MCANet is off
};

// Throws ShapeError when the sample's modalities do not match the dataset layout.
ForwardResult forward(Tape& tape, const Model& model, const MultimodalSample& sample);

struct SampleLoss {
  Var total;
  Var ce;
  Var contrast;
};

SampleLoss sample_loss(const ForwardResult& out, const Model& model, std::size_t label, const LossConfig& loss);

// Trainable scalars the model should hold, from closed-form counts.
std::size_t expected_parameter_count(const ModelConfig& config, const DatasetConfig& data);

}  // namespace ucf
