#include "ucf/encoder.hpp"

namespace ucf {

EncoderLayer EncoderLayer::create(ParameterStore& store, const std::string& prefix,
                                  const AttentionConfig& config, Rng& rng) {
  EncoderLayer layer;
  layer.attention = AttentionWeights::create(store, prefix, config, rng);
  layer.ffn_in = &store.add_weight(prefix + ".ffn_in", config.d, config.d, rng);
  layer.ffn_out = &store.add_weight(prefix + ".ffn_out", config.d, config.d, rng);
  layer.norm1_gain = &store.add_filled(prefix + ".norm1.gain", {config.d}, 1.0);
  layer.norm1_bias = &store.add_zeros(prefix + ".norm1.bias", {config.d});
  layer.norm2_gain = &store.add_filled(prefix + ".norm2.gain", {config.d}, 1.0);
  layer.norm2_bias = &store.add_zeros(prefix + ".norm2.bias", {config.d});
  return layer;
}

Var EncoderLayer::apply(Var x, const TokenGroups& groups) const {
  Tape& tape = x.tape();
  Var a = attend(x, attention, groups);
  x = ops::layer_norm(ops::add(x, a), tape.parameter(*norm1_gain), tape.parameter(*norm1_bias));
  Var f = ops::matmul(ops::relu(ops::matmul(x, tape.parameter(*ffn_in))), tape.parameter(*ffn_out));
  return ops::layer_norm(ops::add(x, f), tape.parameter(*norm2_gain), tape.parameter(*norm2_bias));
}

FtmtSimEncoder FtmtSimEncoder::create(ParameterStore& store, const std::string& prefix,
                                      const AttentionConfig& config, Rng& rng) {
  FtmtSimEncoder enc;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l + 1);
    enc.modality_stream.push_back(EncoderLayer::create(store, base + ".modality", config, rng));
    enc.temporal_stream.push_back(EncoderLayer::create(store, base + ".temporal", config, rng));
  }
  enc.merge = &store.add_weight(prefix + ".merge", 2 * config.d, config.d, rng);
  return enc;
}

FtmtSeqEncoder FtmtSeqEncoder::create(ParameterStore& store, const std::string& prefix,
                                      const AttentionConfig& config, Rng& rng) {
  FtmtSeqEncoder enc;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l + 1);
    FtmtSeqEncoder::Layer layer;
    layer.temporal = EncoderLayer::create(store, base + ".temporal", config, rng);
    layer.modality = EncoderLayer::create(store, base + ".modality", config, rng);
    enc.layers.push_back(std::move(layer));
  }
  return enc;
}

FullEncoder FullEncoder::create(ParameterStore& store, const std::string& prefix,
                                const AttentionConfig& config, Rng& rng) {
  FullEncoder enc;
  for (std::size_t l = 0; l < config.layers; ++l) {
    enc.layers.push_back(
        EncoderLayer::create(store, prefix + ".layer" + std::to_string(l + 1) + ".joint", config, rng));
  }
  return enc;
}

std::string to_string(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::sim: return "sim";
    case EncoderVariant::seq: return "seq";
    case EncoderVariant::full: return "full";
    case EncoderVariant::none: return "none";
  }
  return "none";
}

EncoderVariant encoder_variant_from_string(const std::string& s) {
  if (s == "sim") return EncoderVariant::sim;
  if (s == "seq") return EncoderVariant::seq;
  if (s == "full") return EncoderVariant::full;
  if (s == "none") return EncoderVariant::none;
  throw ConfigError("model.encoder_variant: unknown variant '" + s + "'");
}

Encoder make_encoder(EncoderVariant variant, ParameterStore& store, const std::string& prefix,
                     const AttentionConfig& config, Rng& rng) {
  switch (variant) {
    case EncoderVariant::sim: return FtmtSimEncoder::create(store, prefix, config, rng);
    case EncoderVariant::seq: return FtmtSeqEncoder::create(store, prefix, config, rng);
    case EncoderVariant::full: return FullEncoder::create(store, prefix, config, rng);
    case EncoderVariant::none: return std::monostate{};
  }
  return std::monostate{};
}

namespace {

void check_grid(const EmbeddingGrid& z0, const PositionalTable& table) {
  const auto& s = z0.z.shape();
  if (s.size() != 2 || s[0] != z0.modalities * z0.steps || s[1] != z0.dim) {
    throw ShapeError("encoder: grid value " + shape_str(s) + " does not match N·T×d = " +
                     std::to_string(z0.modalities * z0.steps) + "x" + std::to_string(z0.dim));
  }
  if (table.steps() != z0.steps || table.dim() != z0.dim) {
    throw ShapeError("encoder: positional table " + shape_str(table.pe.shape) + " vs T×d = " +
                     std::to_string(z0.steps) + "x" + std::to_string(z0.dim));
  }
}

void check_width(const EmbeddingGrid& z0, const EncoderLayer& layer) {
  if (layer.attention.wq->value.shape[0] != z0.dim) {
    throw ShapeError("encoder: layer width " + std::to_string(layer.attention.wq->value.shape[0]) +
                     " vs embedding dim " + std::to_string(z0.dim));
  }
}

}  // namespace

EmbeddingGrid encode_sim(const EmbeddingGrid& z0, const FtmtSimEncoder& enc, const PositionalTable& table) {
  check_grid(z0, table);
  for (const auto& l : enc.modality_stream) check_width(z0, l);
  const auto by_step = modality_token_groups(z0.modalities, z0.steps);
  const auto by_modality = temporal_token_groups(z0.modalities, z0.steps);

  Var across_modalities = z0.z;
  for (const auto& layer : enc.modality_stream) across_modalities = layer.apply(across_modalities, by_step);

  Var across_time = add_positional(z0, table).z;
  for (const auto& layer : enc.temporal_stream) across_time = layer.apply(across_time, by_modality);

  Tape& tape = z0.z.tape();
  Var merged = ops::matmul(ops::concat_cols(across_modalities, across_time), tape.parameter(*enc.merge));
  return z0.with(ops::add(z0.z, merged));
}

EmbeddingGrid encode_seq(const EmbeddingGrid& z0, const FtmtSeqEncoder& enc, const PositionalTable& table) {
  check_grid(z0, table);
  for (const auto& l : enc.layers) check_width(z0, l.temporal);
  const auto by_step = modality_token_groups(z0.modalities, z0.steps);
  const auto by_modality = temporal_token_groups(z0.modalities, z0.steps);

  Var x = add_positional(z0, table).z;
  for (const auto& layer : enc.layers) {
    x = layer.temporal.apply(x, by_modality);
    x = layer.modality.apply(x, by_step);
  }
  return z0.with(ops::add(z0.z, x));
}

EmbeddingGrid encode_full(const EmbeddingGrid& z0, const FullEncoder& enc, const PositionalTable& table) {
  check_grid(z0, table);
  for (const auto& l : enc.layers) check_width(z0, l);
  const auto all = joint_token_groups(z0.modalities, z0.steps);
  Var x = add_positional(z0, table).z;
  for (const auto& layer : enc.layers) x = layer.apply(x, all);
  return z0.with(ops::add(z0.z, x));
}

EmbeddingGrid encode(const EmbeddingGrid& z0, const Encoder& enc, const PositionalTable& table) {
  struct Visitor {
    const EmbeddingGrid& z0;
    const PositionalTable& table;
    EmbeddingGrid operator()(std::monostate) const { return z0; }
    EmbeddingGrid operator()(const FtmtSimEncoder& e) const { return encode_sim(z0, e, table); }
    EmbeddingGrid operator()(const FtmtSeqEncoder& e) const { return encode_seq(z0, e, table); }
    EmbeddingGrid operator()(const FullEncoder& e) const { return encode_full(z0, e, table); }
  };
  return std::visit(Visitor{z0, table}, enc);
}

}  // namespace ucf
