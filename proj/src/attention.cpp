#include "ucf/attention.hpp"

#include <numeric>

namespace ucf {

void AttentionConfig::validate() const {
  if (d == 0) throw ConfigError("model.d must be positive");
  if (heads == 0) throw ConfigError("model.heads must be positive");
  if (d_k == 0) throw ConfigError("model.d_k must be positive");
  if (d_v == 0) throw ConfigError("model.d_v must be positive");
  if (layers == 0) throw ConfigError("model.layers must be positive");
}

AttentionWeights AttentionWeights::create(ParameterStore& store, const std::string& prefix,
                                          const AttentionConfig& config, Rng& rng) {
  AttentionWeights w;
  w.heads = config.heads;
  w.d_k = config.d_k;
  w.d_v = config.d_v;
  w.wq = &store.add_weight(prefix + ".wq", config.d, config.heads * config.d_k, rng);
  w.wk = &store.add_weight(prefix + ".wk", config.d, config.heads * config.d_k, rng);
  w.wv = &store.add_weight(prefix + ".wv", config.d, config.heads * config.d_v, rng);
  w.wo = &store.add_weight(prefix + ".wo", config.heads * config.d_v, config.d, rng);
  return w;
}

TokenGroups modality_token_groups(std::size_t modalities, std::size_t steps) {
  TokenGroups groups(steps);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t n = 0; n < modalities; ++n) groups[t].push_back(n * steps + t);
  return groups;
}

TokenGroups temporal_token_groups(std::size_t modalities, std::size_t steps) {
  TokenGroups groups(modalities);
  for (std::size_t n = 0; n < modalities; ++n) {
    groups[n].resize(steps);
    std::iota(groups[n].begin(), groups[n].end(), n * steps);
  }
  return groups;
}

TokenGroups joint_token_groups(std::size_t modalities, std::size_t steps) {
  TokenGroups groups(1, std::vector<std::size_t>(modalities * steps));
  std::iota(groups[0].begin(), groups[0].end(), 0);
  return groups;
}

Var attend(Var tokens, const AttentionWeights& weights, const TokenGroups& groups) {
  Tape& tape = tokens.tape();
  Var q = ops::matmul(tokens, tape.parameter(*weights.wq));
  Var k = ops::matmul(tokens, tape.parameter(*weights.wk));
  Var v = ops::matmul(tokens, tape.parameter(*weights.wv));
  Var heads = ops::grouped_attention(q, k, v, groups, weights.heads);
  return ops::matmul(heads, tape.parameter(*weights.wo));
}

Var scaled_dot_attention(Var tokens, const AttentionWeights& weights) {
  const std::size_t m = tokens.shape().at(0);
  return attend(tokens, weights, joint_token_groups(1, m));
}

EmbeddingGrid modality_attention(const EmbeddingGrid& grid, const AttentionWeights& weights) {
  return grid.with(attend(grid.z, weights, modality_token_groups(grid.modalities, grid.steps)));
}

EmbeddingGrid temporal_attention(const EmbeddingGrid& grid, const AttentionWeights& weights,
                                 const PositionalTable* table) {
  const EmbeddingGrid in = table ? add_positional(grid, *table) : grid;
  return grid.with(attend(in.z, weights, temporal_token_groups(grid.modalities, grid.steps)));
}

EmbeddingGrid full_joint_attention(const EmbeddingGrid& grid, const AttentionWeights& weights,
                                   const PositionalTable* table) {
  const EmbeddingGrid in = table ? add_positional(grid, *table) : grid;
  return grid.with(attend(in.z, weights, joint_token_groups(grid.modalities, grid.steps)));
}

}  // namespace ucf
