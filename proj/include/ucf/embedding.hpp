#pragma once

#include <span>
#include <string>
#include <vector>

#include "ucf/autodiff.hpp"
#include "ucf/data.hpp"
#include "ucf/parameter.hpp"

namespace ucf {

// Modality-major N×T×d embeddings stored as an (N·T)×d matrix; row n·T + t
// holds modality n at step t.
struct EmbeddingGrid {
  Var z;
  std::size_t modalities = 0;
  std::size_t steps = 0;
  std::size_t dim = 0;

  std::size_t row(std::size_t n, std::size_t t) const { return n * steps + t; }
  // T×d slice of one modality.
  Var modality(std::size_t n) const;
  EmbeddingGrid with(Var next) const { return {next, modalities, steps, dim}; }
};

// Per-step perceptron raw → 2·d_f → d_f with relu in between.
struct ToyBackbone {
  std::size_t modality = 0;
  std::size_t raw_dim = 0;
  std::size_t feature_dim = 0;
  Parameter* w1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* w2 = nullptr;
  Parameter* b2 = nullptr;

  static ToyBackbone create(ParameterStore& store, const std::string& prefix, std::size_t modality,
                            std::size_t raw_dim, std::size_t feature_dim, Rng& rng);
  Var apply(Tape& tape, const Tensor& x) const;
};

// One bias-free d_f(n)×d map per modality.
struct ProjectionWeights {
  std::vector<Parameter*> maps;
  std::size_t dim = 0;

  static ProjectionWeights create(ParameterStore& store, const std::string& prefix,
                                  std::span<const std::size_t> feature_dims, std::size_t dim, Rng& rng);
};

struct PositionalTable {
  Tensor pe;  // T×d; pe[t,2i]=sin(t/10000^(2i/d)), pe[t,2i+1]=cos(same)

  static PositionalTable build(std::size_t steps, std::size_t dim);
  std::size_t steps() const { return pe.shape[0]; }
  std::size_t dim() const { return pe.shape[1]; }
};

std::vector<Var> extract_features(Tape& tape, std::span<const Tensor> inputs,
                                  std::span<const ToyBackbone> backbones);
std::vector<Var> extract_features(Tape& tape, const MultimodalSample& sample,
                                  std::span<const ToyBackbone> backbones);

EmbeddingGrid project(std::span<const Var> features, const ProjectionWeights& weights);

Var add_positional(Var z_n, const PositionalTable& table);
// Adds the table to every modality's T×d slice.
EmbeddingGrid add_positional(const EmbeddingGrid& grid, const PositionalTable& table);

}  // namespace ucf
