#pragma once

#include <string>

#include "ucf/autodiff.hpp"
#include "ucf/embedding.hpp"

namespace ucf {

struct AttentionConfig {
  std::size_t d = 512;
  std::size_t heads = 8;
  std::size_t d_k = 64;
  std::size_t d_v = 64;
  std::size_t layers = 4;

  void validate() const;
};

// Bias-free multi-head projections: W_q, W_k are d×(h·d_k), W_v is d×(h·d_v)
// and W_O maps the concatenated heads back to d.
struct AttentionWeights {
  Parameter* wq = nullptr;
  Parameter* wk = nullptr;
  Parameter* wv = nullptr;
  Parameter* wo = nullptr;
  std::size_t heads = 0;
  std::size_t d_k = 0;
  std::size_t d_v = 0;

  static AttentionWeights create(ParameterStore& store, const std::string& prefix,
                                 const AttentionConfig& config, Rng& rng);
};

TokenGroups modality_token_groups(std::size_t modalities, std::size_t steps);
TokenGroups temporal_token_groups(std::size_t modalities, std::size_t steps);
TokenGroups joint_token_groups(std::size_t modalities, std::size_t steps);

// Multi-head attention restricted to the given token groups.
Var attend(Var tokens, const AttentionWeights& weights, const TokenGroups& groups);

// All m tokens attend to each other.
Var scaled_dot_attention(Var tokens, const AttentionWeights& weights);

// Per time step, attention across the N modality tokens. No positional signal.
EmbeddingGrid modality_attention(const EmbeddingGrid& grid, const AttentionWeights& weights);

// Per modality, attention across the T time tokens. When `table` is non-null
// the positional encoding is added first.
EmbeddingGrid temporal_attention(const EmbeddingGrid& grid, const AttentionWeights& weights,
                                 const PositionalTable* table);

// One attention over all N·T tokens (the un-factorized baseline).
EmbeddingGrid full_joint_attention(const EmbeddingGrid& grid, const AttentionWeights& weights,
                                   const PositionalTable* table);

}  // namespace ucf
