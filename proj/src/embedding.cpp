#include "ucf/embedding.hpp"

#include <cmath>
#include <numeric>

namespace ucf {

Var EmbeddingGrid::modality(std::size_t n) const {
  std::vector<std::size_t> rows(steps);
  std::iota(rows.begin(), rows.end(), n * steps);
  return ops::gather_rows(z, std::move(rows));
}

ToyBackbone ToyBackbone::create(ParameterStore& store, const std::string& prefix,
                                std::size_t modality, std::size_t raw_dim, std::size_t feature_dim,
                                Rng& rng) {
  ToyBackbone b;
  b.modality = modality;
  b.raw_dim = raw_dim;
  b.feature_dim = feature_dim;
  b.w1 = &store.add_weight(prefix + ".w1", raw_dim, 2 * feature_dim, rng);
  b.b1 = &store.add_zeros(prefix + ".b1", {2 * feature_dim});
  b.w2 = &store.add_weight(prefix + ".w2", 2 * feature_dim, feature_dim, rng);
  b.b2 = &store.add_zeros(prefix + ".b2", {feature_dim});
  return b;
}

Var ToyBackbone::apply(Tape& tape, const Tensor& x) const {
  if (x.rank() != 2 || x.shape[1] != raw_dim) {
    throw ShapeError("backbone " + std::to_string(modality) + ": expected T×" + std::to_string(raw_dim) +
                     " input, got " + shape_str(x.shape));
  }
  Var in = tape.constant(x);
  Var h = ops::relu(ops::add_row(ops::matmul(in, tape.parameter(*w1)), tape.parameter(*b1)));
  return ops::add_row(ops::matmul(h, tape.parameter(*w2)), tape.parameter(*b2));
}

ProjectionWeights ProjectionWeights::create(ParameterStore& store, const std::string& prefix,
                                            std::span<const std::size_t> feature_dims,
                                            std::size_t dim, Rng& rng) {
  ProjectionWeights w;
  w.dim = dim;
  for (std::size_t n = 0; n < feature_dims.size(); ++n) {
    w.maps.push_back(&store.add_weight(prefix + ".w" + std::to_string(n), feature_dims[n], dim, rng));
  }
  return w;
}

PositionalTable PositionalTable::build(std::size_t steps, std::size_t dim) {
  PositionalTable table{Tensor({steps, dim})};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; 2 * i < dim; ++i) {
      const double angle =
          static_cast<double>(t) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
      table.pe(t, 2 * i) = std::sin(angle);
      if (2 * i + 1 < dim) table.pe(t, 2 * i + 1) = std::cos(angle);
    }
  }
  return table;
}

std::vector<Var> extract_features(Tape& tape, std::span<const Tensor> inputs,
                                  std::span<const ToyBackbone> backbones) {
  if (inputs.size() != backbones.size()) {
    throw ConfigError("extract_features: " + std::to_string(inputs.size()) + " modalities but " +
                      std::to_string(backbones.size()) + " backbones");
  }
  std::vector<Var> out;
  out.reserve(inputs.size());
  for (std::size_t n = 0; n < inputs.size(); ++n) out.push_back(backbones[n].apply(tape, inputs[n]));
  return out;
}

std::vector<Var> extract_features(Tape& tape, const MultimodalSample& sample,
                                  std::span<const ToyBackbone> backbones) {
  return extract_features(tape, sample.inputs, backbones);
}

EmbeddingGrid project(std::span<const Var> features, const ProjectionWeights& weights) {
  if (features.empty()) throw ShapeError("project: no modalities");
  if (features.size() != weights.maps.size()) {
    throw ShapeError("project: " + std::to_string(features.size()) + " feature sequences but " +
                     std::to_string(weights.maps.size()) + " projection maps");
  }
  Tape& tape = features[0].tape();
  const std::size_t steps = features[0].shape()[0];
  std::vector<Var> parts;
  for (std::size_t n = 0; n < features.size(); ++n) {
    const auto& fs = features[n].shape();
    const auto& ws = weights.maps[n]->value.shape;
    if (fs.size() != 2 || fs[1] != ws[0] || fs[0] != steps) {
      throw ShapeError("project: modality " + std::to_string(n) + " features " + shape_str(fs) +
                       " incompatible with map " + shape_str(ws));
    }
    parts.push_back(ops::matmul(features[n], tape.parameter(*weights.maps[n])));
  }
  return {ops::concat_rows(parts), features.size(), steps, weights.dim};
}

Var add_positional(Var z_n, const PositionalTable& table) {
  if (z_n.shape() != table.pe.shape) {
    throw ShapeError("add_positional: slice " + shape_str(z_n.shape()) + " vs table " +
                     shape_str(table.pe.shape));
  }
  return ops::add(z_n, z_n.tape().constant(table.pe));
}

EmbeddingGrid add_positional(const EmbeddingGrid& grid, const PositionalTable& table) {
  if (table.steps() != grid.steps || table.dim() != grid.dim) {
    throw ShapeError("add_positional: grid T×d = " + std::to_string(grid.steps) + "x" +
                     std::to_string(grid.dim) + " vs table " + shape_str(table.pe.shape));
  }
  Tensor tiled({grid.modalities * grid.steps, grid.dim});
  for (std::size_t n = 0; n < grid.modalities; ++n)
    std::copy(table.pe.data.begin(), table.pe.data.end(),
              tiled.data.begin() + static_cast<std::ptrdiff_t>(n * table.pe.size()));
  return grid.with(ops::add(grid.z, grid.z.tape().constant(std::move(tiled))));
}

}  // namespace ucf
