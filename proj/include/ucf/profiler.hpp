#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucf/encoder.hpp"

namespace ucf {

// Dimensions that determine encoder cost.
struct ProfileConfig {
  std::uint64_t modalities = 3;
  std::uint64_t steps = 8;
  std::uint64_t d = 512;
  std::uint64_t heads = 8;
  std::uint64_t d_k = 64;
  std::uint64_t d_v = 64;
  std::uint64_t layers = 4;

  static ProfileConfig from(const AttentionConfig& attention, std::uint64_t modalities, std::uint64_t steps);
};

struct CostParts {
  std::uint64_t projection = 0;        // Q, K, V, O maps
  std::uint64_t attention_scores = 0;  // QKᵀ and P·V
  std::uint64_t feed_forward = 0;
  std::uint64_t norm = 0;
  std::uint64_t merge = 0;

  std::uint64_t total() const { return projection + attention_scores + feed_forward + norm + merge; }
  CostParts& operator+=(const CostParts& o);
  friend CostParts operator*(std::uint64_t k, const CostParts& c);
  friend bool operator==(const CostParts&, const CostParts&) = default;
};

// MAC convention: one multiply-accumulate counts as one FLOP. The headline
// FLOP figure (`flops`) covers the Q/K/V/O projections only.
struct CostReport {
  EncoderVariant variant = EncoderVariant::sim;
  ProfileConfig config;
  CostParts params_per_layer;
  CostParts params;  // all layers plus once-only parts
  CostParts macs_per_layer;
  CostParts macs;

  std::uint64_t core_params_per_layer() const {
    return params_per_layer.projection + params_per_layer.feed_forward;
  }
  std::uint64_t flops_per_layer() const { return macs_per_layer.projection; }
  std::uint64_t flops() const { return macs.projection; }
};

// 2·d·h·d_k + 2·d·h·d_v.
std::uint64_t attention_block_params(const ProfileConfig& c);

// Scalars in an encoder of the given variant (none → 0).
CostParts count_params(EncoderVariant variant, const ProfileConfig& c);
CostParts count_params_per_layer(EncoderVariant variant, const ProfileConfig& c);
CostParts count_macs(EncoderVariant variant, const ProfileConfig& c);
CostParts count_macs_per_layer(EncoderVariant variant, const ProfileConfig& c);

CostReport profile_encoder(EncoderVariant variant, const ProfileConfig& c);

struct ComplexityRow {
  EncoderVariant variant;
  std::uint64_t layers;
  std::uint64_t params_total;
  std::uint64_t params_delta;  // versus layers − 1
  std::uint64_t macs_total;    // projection MACs
  std::uint64_t macs_delta;
  std::uint64_t score_macs;
  std::uint64_t projection_macs;
  std::uint64_t ffn_macs;
};

// Rows for every variant in {sim, seq, full} and every layer count in
// [min_layers, max_layers], variant-major.
std::vector<ComplexityRow> compare_complexity(const ProfileConfig& c, std::uint64_t min_layers = 2,
                                              std::uint64_t max_layers = 5);

std::string complexity_csv(const std::vector<ComplexityRow>& rows);
std::string complexity_text(const ProfileConfig& c, const std::vector<ComplexityRow>& rows);

// Reference per-layer deltas for the factorized encoder at the default size.
inline constexpr double kReferenceParamDeltaMillions = 3.15;
inline constexpr double kReferenceFlopDeltaMillions = 50.36;

}  // namespace ucf
