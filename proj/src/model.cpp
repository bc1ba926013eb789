#include "ucf/model.hpp"

#include <algorithm>

#include "ucf/profiler.hpp"

namespace ucf {

void ModelConfig::validate(std::size_t dataset_modalities) const {
  attention.validate();
  if (feature_dims.size() != dataset_modalities) {
    throw ConfigError("model.feature_dims: " + std::to_string(feature_dims.size()) + " entries for " +
                      std::to_string(dataset_modalities) + " modalities");
  }
  for (std::size_t f : feature_dims)
    if (f == 0) throw ConfigError("model.feature_dims: entries must be positive");
  if (!active_modalities.empty() && active_modalities.size() != dataset_modalities) {
    throw ConfigError("model.active_modalities: " + std::to_string(active_modalities.size()) +
                      " entries for " + std::to_string(dataset_modalities) + " modalities");
  }
  if (active_indices(dataset_modalities).empty()) {
    throw ConfigError("model.active_modalities: at least one modality must be active");
  }
  if (main_modality >= dataset_modalities) {
    throw ConfigError("model.main_modality: index " + std::to_string(main_modality) + " but only " +
                      std::to_string(dataset_modalities) + " modalities");
  }
}

std::vector<std::size_t> ModelConfig::active_indices(std::size_t dataset_modalities) const {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < dataset_modalities; ++n)
    if (active_modalities.empty() || active_modalities[n]) out.push_back(n);
  return out;
}

EncoderVariant Model::effective_variant() const {
  if (config.encoder_variant == EncoderVariant::none) return EncoderVariant::none;
  return active.size() == 1 ? EncoderVariant::full : config.encoder_variant;
}

Model Model::create(const ModelConfig& config, const DatasetConfig& data, std::uint64_t seed) {
  data.validate();
  config.validate(data.n_modalities);
  Model m;
  m.config = config;
  m.steps = data.n_steps;
  m.classes = data.n_classes;
  m.active = config.active_indices(data.n_modalities);
  const std::size_t d = config.attention.d;

  Rng rng(seed);
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < m.active.size(); ++i) {
    const std::size_t n = m.active[i];
    m.backbones.push_back(ToyBackbone::create(m.store, "backbone" + std::to_string(n), n, data.raw_dims[n],
                                              config.feature_dims[n], rng));
    dims.push_back(config.feature_dims[n]);
  }
  m.projection = ProjectionWeights::create(m.store, "projection", dims, d, rng);
  m.encoder = make_encoder(m.effective_variant(), m.store, "ftmt", config.attention, rng);
  m.table = PositionalTable::build(m.steps, d);
  const std::size_t head_in = config.enable_mcanet ? m.steps * d : m.active.size() * m.steps * d;
  m.head = ClassifierHead::create(m.store, "head", head_in, d, m.classes, rng);

  const auto it = std::find(m.active.begin(), m.active.end(), config.main_modality);
  const std::size_t main = it == m.active.end() ? 0 : static_cast<std::size_t>(it - m.active.begin());
  m.roles = ModalityRoles::with_main(m.active.size(), main);
  return m;
}

ForwardResult forward(Tape& tape, const Model& model, const MultimodalSample& sample) {
  if (sample.inputs.size() <= model.active.back()) {
    throw ShapeError("forward: sample has " + std::to_string(sample.inputs.size()) +
                     " modalities, model reads modality " + std::to_string(model.active.back()));
  }
  std::vector<Var> features;
  for (std::size_t i = 0; i < model.active.size(); ++i) {
    const Tensor& x = sample.inputs[model.active[i]];
    if (x.rank() != 2 || x.shape[0] != model.steps) {
      throw ShapeError("forward: modality " + std::to_string(model.active[i]) + " input " + shape_str(x.shape) +
                       " does not have " + std::to_string(model.steps) + " steps");
    }
    features.push_back(model.backbones[i].apply(tape, x));
  }
  ForwardResult out;
  out.initial = project(features, model.projection);
  out.encoded = encode(out.initial, model.encoder, model.table);
  if (model.config.enable_mcanet) {
    out.fusion = fuse(out.encoded, model.roles);
    out.logits = classifier_logits(out.fusion->c_agg, model.head);
  } else {
    out.logits = classifier_logits(out.encoded.z, model.head);
  }
  out.probs = ops::softmax(out.logits, 0);
  return out;
}

SampleLoss sample_loss(const ForwardResult& out, const Model& model, std::size_t label, const LossConfig& loss) {
  SampleLoss s;
  s.ce = ce_loss_from_logits(out.logits, label);
  if (model.config.enable_mcanet) {
    s.contrast = contrastive_loss(out.encoded, model.roles, loss);
    s.total = total_loss(s.ce, s.contrast, loss);
  } else {
    s.contrast = out.probs.tape().constant(Tensor::scalar(0.0));
    s.total = s.ce;
  }
  return s;
}

std::size_t expected_parameter_count(const ModelConfig& config, const DatasetConfig& data) {
  const auto active = config.active_indices(data.n_modalities);
  const std::size_t d = config.attention.d;
  std::size_t total = 0;
  for (std::size_t n : active) {
    const std::size_t r = data.raw_dims[n], f = config.feature_dims[n];
    total += r * 2 * f + 2 * f + 2 * f * f + f;  // backbone
    total += f * d;                              // projection
  }
  EncoderVariant v = config.encoder_variant;
  if (v != EncoderVariant::none && active.size() == 1) v = EncoderVariant::full;
  total += count_params(v, ProfileConfig::from(config.attention, active.size(), data.n_steps)).total();
  const std::size_t head_in = (config.enable_mcanet ? 1 : active.size()) * data.n_steps * d;
  total += head_in * d + d + d * data.n_classes + data.n_classes;
  return total;
}

}  // namespace ucf
