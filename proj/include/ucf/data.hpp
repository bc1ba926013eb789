#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ucf/tensor.hpp"

namespace ucf {

enum class Partition { train, val, test };

std::string to_string(Partition p);
Partition partition_from_string(const std::string& s);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// Class-conditioned latent trajectories observed through per-modality masks.
//
// With class_pairing on, modality n only resolves classes up to the pairs of
// round n of a round-robin schedule, so no modality separates every class on
// its own while any two modalities with distinct rounds do. A latent
// coordinate seen by several modalities carries the coarsest information
// common to all of them.
struct DatasetConfig {
  std::size_t n_modalities = 3;
  std::size_t n_steps = 8;
  std::size_t n_classes = 6;
  std::size_t latent_dim = 9;
  std::vector<std::size_t> raw_dims{16, 12, 9};
  std::vector<double> noise_sigma{0.3, 0.3, 0.3};
  std::vector<std::vector<std::size_t>> informative_masks{{0, 1, 2, 3}, {3, 4, 5, 6}, {6, 7, 8, 0}};
  double jitter_sigma = 0.3;
  double drift_amplitude = 0.5;
  // Scale of the per-class constant offset of each latent coordinate.
  double anchor_scale = 1.0;
  // Each sample's trajectory is read at t + δ with δ ~ U[0, time_shift].
  double time_shift = 0.0;
  bool class_pairing = true;
  std::size_t samples_per_class = 40;
  std::uint64_t seed = 0;
  SplitFractions split;

  void validate() const;
};

struct MultimodalSample {
  // One T×raw_dims[n] matrix per modality.
  std::vector<Tensor> inputs;
  std::size_t label = 0;
};

struct Dataset {
  DatasetConfig config;
  std::vector<MultimodalSample> samples;
  std::vector<Partition> partitions;

  std::vector<std::size_t> indices(Partition p) const;
};

// symbols[j][c]: which trajectory variant latent coordinate j follows for class c.
std::vector<std::vector<std::size_t>> class_symbols(const DatasetConfig& config);

// Noise-free latent trajectory of class c, T×latent_dim.
Tensor class_trajectory(const DatasetConfig& config, std::size_t cls);

Dataset generate_dataset(const DatasetConfig& config);

// Linear interpolation of a timestamped series at T evenly spaced times
// spanning [times.front(), times.back()].
std::vector<double> resample_to_common_rate(std::span<const double> times,
                                            std::span<const double> values, std::size_t steps);
// Row-wise variant: values is len(times)×channels.
Tensor resample_to_common_rate(std::span<const double> times, const Tensor& values,
                               std::size_t steps);

// On-disk layout: DIR/manifest.json plus DIR/samples/<id>.bin per sample.
// Sample files: u32 N, then per modality u32 T and u32 raw_dim, then every
// modality's T×raw_dim float64 values; all little-endian.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

std::vector<unsigned char> encode_sample(const MultimodalSample& sample);
MultimodalSample decode_sample(std::span<const unsigned char> bytes);

}  // namespace ucf
