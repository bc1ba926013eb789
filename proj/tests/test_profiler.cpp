#include <gtest/gtest.h>

#include "ucf/profiler.hpp"

using namespace ucf;

namespace {

// Query-key pairs visited by attention over the given groups.
std::uint64_t pair_count(const TokenGroups& groups) {
  std::uint64_t n = 0;
  for (const auto& g : groups) n += g.size() * g.size();
  return n;
}

std::uint64_t built_scalars(EncoderVariant v, const AttentionConfig& cfg) {
  ParameterStore store;
  Rng rng(0);
  make_encoder(v, store, "ftmt", cfg, rng);
  return store.scalar_count();
}

}  // namespace

TEST(CountParams, SingleBlockIsFourDSquared) {
  EXPECT_EQ(attention_block_params({}), 1'048'576u);
  EXPECT_EQ(attention_block_params({}), 4u * 512 * 512);
}

TEST(CountParams, FactorizedLayerCore) {
  EXPECT_EQ(profile_encoder(EncoderVariant::sim, {}).core_params_per_layer(), 3'145'728u);
  EXPECT_EQ(profile_encoder(EncoderVariant::seq, {}).core_params_per_layer(), 3'145'728u);
  EXPECT_EQ(profile_encoder(EncoderVariant::sim, {.d = 1, .heads = 1, .d_k = 1, .d_v = 1}).core_params_per_layer(),
            12u);
}

TEST(CountParams, AgreesWithBuiltEncoders) {
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full}) {
    for (std::size_t layers : {1, 3}) {
      const AttentionConfig cfg{.d = 12, .heads = 3, .d_k = 5, .d_v = 7, .layers = layers};
      const ProfileConfig pc = ProfileConfig::from(cfg, 3, 4);
      EXPECT_EQ(count_params(v, pc).total(), built_scalars(v, cfg)) << to_string(v) << " L=" << layers;
    }
  }
  EXPECT_EQ(count_params(EncoderVariant::none, {}).total(), 0u);
}

TEST(CountMacs, FactorizedProjectionDelta) {
  const CostReport r = profile_encoder(EncoderVariant::sim, {});
  EXPECT_EQ(r.flops_per_layer(), 50'331'648u);
  EXPECT_EQ(r.flops_per_layer(), 24u * 8 * 512 * 512);
}

TEST(CountMacs, ScoreRatioMatchesPairEnumeration) {
  for (std::uint64_t n : {2, 4, 8, 16}) {
    for (std::uint64_t t : {2, 4, 8, 16}) {
      const ProfileConfig c{.modalities = n, .steps = t};
      const std::uint64_t full = count_macs_per_layer(EncoderVariant::full, c).attention_scores;
      const std::uint64_t fact = count_macs_per_layer(EncoderVariant::sim, c).attention_scores;
      const std::uint64_t full_pairs = pair_count(joint_token_groups(n, t));
      const std::uint64_t fact_pairs = pair_count(modality_token_groups(n, t)) + pair_count(temporal_token_groups(n, t));
      // full/fact == full_pairs/fact_pairs, compared without division.
      EXPECT_EQ(full * fact_pairs, fact * full_pairs) << n << "x" << t;
      EXPECT_EQ(full_pairs, (n * t) * (n * t));
      EXPECT_EQ(fact_pairs, n * n * t + n * t * t);
    }
  }
  const ProfileConfig c{.modalities = 16, .steps = 16};
  EXPECT_EQ(count_macs_per_layer(EncoderVariant::full, c).attention_scores,
            8 * count_macs_per_layer(EncoderVariant::sim, c).attention_scores);
}

TEST(CompareComplexity, DeltasAreConstantAcrossLayers) {
  const auto rows = compare_complexity({}, 2, 5);
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    if (r.variant == EncoderVariant::full) continue;
    EXPECT_EQ(r.params_delta, 12u * 512 * 512 + 8u * 512);
    EXPECT_EQ(r.macs_delta, 50'331'648u);
  }
}

TEST(CompareComplexity, CsvHasOneLinePerRow) {
  const auto rows = compare_complexity({}, 2, 3);
  const std::string csv = complexity_csv(rows);
  EXPECT_EQ(csv.rfind("# ", 0), 0u);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 2 + rows.size());
  EXPECT_NE(csv.find("50331648"), std::string::npos);
}

TEST(CompareComplexity, TextMentionsTheReferenceDeltas) {
  const std::string text = complexity_text({}, compare_complexity({}));
  EXPECT_NE(text.find("3.15"), std::string::npos);
  EXPECT_NE(text.find("50.36"), std::string::npos);
}
