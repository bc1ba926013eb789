#include "ucf/profiler.hpp"

#include <iomanip>
#include <sstream>

namespace ucf {

ProfileConfig ProfileConfig::from(const AttentionConfig& a, std::uint64_t modalities, std::uint64_t steps) {
  return {modalities, steps, a.d, a.heads, a.d_k, a.d_v, a.layers};
}

CostParts& CostParts::operator+=(const CostParts& o) {
  projection += o.projection;
  attention_scores += o.attention_scores;
  feed_forward += o.feed_forward;
  norm += o.norm;
  merge += o.merge;
  return *this;
}

CostParts operator*(std::uint64_t k, const CostParts& c) {
  return {k * c.projection, k * c.attention_scores, k * c.feed_forward, k * c.norm, k * c.merge};
}

std::uint64_t attention_block_params(const ProfileConfig& c) {
  return 2 * c.d * c.heads * c.d_k + 2 * c.d * c.heads * c.d_v;
}

namespace {

// Attention sublayers per encoder layer.
std::uint64_t blocks_per_layer(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::sim:
    case EncoderVariant::seq: return 2;
    case EncoderVariant::full: return 1;
    case EncoderVariant::none: return 0;
  }
  return 0;
}

// QKᵀ plus P·V for all groups of size g, repeated `groups` times.
std::uint64_t score_macs(const ProfileConfig& c, std::uint64_t groups, std::uint64_t g) {
  return groups * g * g * (c.heads * c.d_k + c.heads * c.d_v);
}

}  // namespace

CostParts count_params_per_layer(EncoderVariant variant, const ProfileConfig& c) {
  const std::uint64_t b = blocks_per_layer(variant);
  CostParts p;
  p.projection = b * attention_block_params(c);
  p.feed_forward = b * 2 * c.d * c.d;
  p.norm = b * 2 * 2 * c.d;
  return p;
}

CostParts count_params(EncoderVariant variant, const ProfileConfig& c) {
  CostParts p = c.layers * count_params_per_layer(variant, c);
  if (variant == EncoderVariant::sim) p.merge = 2 * c.d * c.d;
  return p;
}

CostParts count_macs_per_layer(EncoderVariant variant, const ProfileConfig& c) {
  const std::uint64_t tokens = c.modalities * c.steps;
  const std::uint64_t b = blocks_per_layer(variant);
  CostParts m;
  m.projection = b * tokens * attention_block_params(c);
  m.feed_forward = b * tokens * 2 * c.d * c.d;
  switch (variant) {
    case EncoderVariant::sim:
    case EncoderVariant::seq:
      m.attention_scores = score_macs(c, c.steps, c.modalities) + score_macs(c, c.modalities, c.steps);
      break;
    case EncoderVariant::full: m.attention_scores = score_macs(c, 1, tokens); break;
    case EncoderVariant::none: break;
  }
  return m;
}

CostParts count_macs(EncoderVariant variant, const ProfileConfig& c) {
  CostParts m = c.layers * count_macs_per_layer(variant, c);
  if (variant == EncoderVariant::sim) m.merge = c.modalities * c.steps * 2 * c.d * c.d;
  return m;
}

CostReport profile_encoder(EncoderVariant variant, const ProfileConfig& c) {
  return {variant, c, count_params_per_layer(variant, c), count_params(variant, c),
          count_macs_per_layer(variant, c), count_macs(variant, c)};
}

std::vector<ComplexityRow> compare_complexity(const ProfileConfig& c, std::uint64_t min_layers,
                                              std::uint64_t max_layers) {
  std::vector<ComplexityRow> rows;
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full}) {
    for (std::uint64_t l = min_layers; l <= max_layers; ++l) {
      ProfileConfig at = c, before = c;
      at.layers = l;
      before.layers = l - 1;
      const CostParts p = count_params(v, at), p0 = count_params(v, before);
      const CostParts m = count_macs(v, at), m0 = count_macs(v, before);
      rows.push_back({v, l, p.total(), p.total() - p0.total(), m.projection, m.projection - m0.projection,
                      m.attention_scores, m.projection, m.feed_forward});
    }
  }
  return rows;
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  std::ostringstream os;
  os << "# 1 MAC = 1 FLOP; macs_total and macs_delta count Q/K/V/O projections only\n";
  os << "variant,layers,params_total,params_delta,macs_total,macs_delta,score_macs,projection_macs,ffn_macs\n";
  for (const auto& r : rows) {
    os << to_string(r.variant) << ',' << r.layers << ',' << r.params_total << ',' << r.params_delta << ','
       << r.macs_total << ',' << r.macs_delta << ',' << r.score_macs << ',' << r.projection_macs << ','
       << r.ffn_macs << '\n';
  }
  return os.str();
}

std::string complexity_text(const ProfileConfig& c, const std::vector<ComplexityRow>& rows) {
  std::ostringstream os;
  os << "Encoder cost (N=" << c.modalities << ", T=" << c.steps << ", d=" << c.d << ", h=" << c.heads
     << ", d_k=" << c.d_k << ", d_v=" << c.d_v << ")\n";
  os << "Convention: 1 MAC = 1 FLOP; MFLOPs count the Q/K/V/O projections only.\n\n";
  os << std::left << std::setw(8) << "variant" << std::right << std::setw(7) << "layers" << std::setw(12)
     << "Params(M)" << std::setw(12) << "dParams(M)" << std::setw(11) << "MFLOPs" << std::setw(11) << "dMFLOPs"
     << std::setw(14) << "score MACs" << '\n';
  os << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    os << std::left << std::setw(8) << to_string(r.variant) << std::right << std::setw(7) << r.layers
       << std::setw(12) << r.params_total / 1e6 << std::setw(12) << r.params_delta / 1e6 << std::setw(11)
       << r.macs_total / 1e6 << std::setw(11) << r.macs_delta / 1e6 << std::setw(14) << r.score_macs << '\n';
  }
  const CostReport f = profile_encoder(EncoderVariant::seq, c);
  os << "\nFactorized per-layer deltas: core params " << f.core_params_per_layer() << " ("
     << f.core_params_per_layer() / 1e6 << " M, reference " << kReferenceParamDeltaMillions
     << " M), with norms " << f.params_per_layer.total() << "; projection MACs " << f.flops_per_layer() << " ("
     << f.flops_per_layer() / 1e6 << " M, reference " << kReferenceFlopDeltaMillions << " M)\n";
  return os.str();
}

}  // namespace ucf
