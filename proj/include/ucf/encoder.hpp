#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ucf/attention.hpp"

namespace ucf {

// Post-norm transformer layer with a bias-free d→d→d feed-forward:
//   x ← layer_norm(x + attention(x)); x ← layer_norm(x + ffn(x))
struct EncoderLayer {
  AttentionWeights attention;
  Parameter* ffn_in = nullptr;
  Parameter* ffn_out = nullptr;
  Parameter* norm1_gain = nullptr;
  Parameter* norm1_bias = nullptr;
  Parameter* norm2_gain = nullptr;
  Parameter* norm2_bias = nullptr;

  static EncoderLayer create(ParameterStore& store, const std::string& prefix,
                             const AttentionConfig& config, Rng& rng);
  Var apply(Var x, const TokenGroups& groups) const;
};

// Modality stream and temporal stream run side by side from the same input
// and are merged once, after the last layer.
struct FtmtSimEncoder {
  std::vector<EncoderLayer> modality_stream;
  std::vector<EncoderLayer> temporal_stream;
  Parameter* merge = nullptr;  // (2d)×d

  static FtmtSimEncoder create(ParameterStore& store, const std::string& prefix,
                               const AttentionConfig& config, Rng& rng);
};

// Every layer: temporal attention sublayer, then modality attention sublayer.
struct FtmtSeqEncoder {
  struct Layer {
    EncoderLayer temporal;
    EncoderLayer modality;
  };
  std::vector<Layer> layers;

  static FtmtSeqEncoder create(ParameterStore& store, const std::string& prefix,
                               const AttentionConfig& config, Rng& rng);
};

// Joint attention over all N·T tokens per layer.
struct FullEncoder {
  std::vector<EncoderLayer> layers;

  static FullEncoder create(ParameterStore& store, const std::string& prefix,
                            const AttentionConfig& config, Rng& rng);
};

enum class EncoderVariant { sim, seq, full, none };

std::string to_string(EncoderVariant v);
EncoderVariant encoder_variant_from_string(const std::string& s);

// std::monostate stands for "no encoder": the grid passes through unchanged.
using Encoder = std::variant<std::monostate, FtmtSimEncoder, FtmtSeqEncoder, FullEncoder>;

Encoder make_encoder(EncoderVariant variant, ParameterStore& store, const std::string& prefix,
                     const AttentionConfig& config, Rng& rng);

// All three add the initial grid back onto their output (global skip).
EmbeddingGrid encode_sim(const EmbeddingGrid& z0, const FtmtSimEncoder& enc, const PositionalTable& table);
EmbeddingGrid encode_seq(const EmbeddingGrid& z0, const FtmtSeqEncoder& enc, const PositionalTable& table);
EmbeddingGrid encode_full(const EmbeddingGrid& z0, const FullEncoder& enc, const PositionalTable& table);

EmbeddingGrid encode(const EmbeddingGrid& z0, const Encoder& enc, const PositionalTable& table);

}  // namespace ucf
