#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ucf/encoder.hpp"

using namespace ucf;
using ucf::testing::random_tensor;

namespace {

constexpr std::size_t kN = 3, kT = 4, kD = 8;

AttentionConfig config() { return {.d = kD, .heads = 2, .d_k = 4, .d_v = 4, .layers = 2}; }

void zero_all(ParameterStore& store) {
  for (Parameter* p : store.all())
    for (auto& v : p->value.data) v = 0.0;
}

Tensor permute_modalities(const Tensor& z, const std::vector<std::size_t>& perm) {
  Tensor out(z.shape);
  for (std::size_t m = 0; m < kN; ++m)
    for (std::size_t s = 0; s < kT; ++s)
      for (std::size_t j = 0; j < kD; ++j) out(m * kT + s, j) = z(perm[m] * kT + s, j);
  return out;
}

class EncoderVariants : public ::testing::TestWithParam<EncoderVariant> {};

}  // namespace

TEST_P(EncoderVariants, PreservesShapeAndIsDeterministic) {
  ParameterStore store;
  Rng rng(1);
  const Encoder enc = make_encoder(GetParam(), store, "ftmt", config(), rng);
  const auto table = PositionalTable::build(kT, kD);
  const Tensor z = random_tensor({kN * kT, kD}, rng);
  Tape t1, t2;
  const EmbeddingGrid a = encode({t1.constant(z), kN, kT, kD}, enc, table);
  const EmbeddingGrid b = encode({t2.constant(z), kN, kT, kD}, enc, table);
  EXPECT_EQ(a.z.shape(), (Shape{kN * kT, kD}));
  EXPECT_EQ(a.z.value(), b.z.value());
}

TEST_P(EncoderVariants, ZeroWeightsReduceToIdentity) {
  ParameterStore store;
  Rng rng(2);
  const Encoder enc = make_encoder(GetParam(), store, "ftmt", config(), rng);
  zero_all(store);
  const auto table = PositionalTable::build(kT, kD);
  const Tensor z = random_tensor({kN * kT, kD}, rng);
  Tape tape;
  EXPECT_EQ(encode({tape.constant(z), kN, kT, kD}, enc, table).z.value(), z);
}

TEST_P(EncoderVariants, WidthMismatchIsShapeError) {
  ParameterStore store;
  Rng rng(3);
  const Encoder enc = make_encoder(GetParam(), store, "ftmt", config(), rng);
  if (std::holds_alternative<std::monostate>(enc)) GTEST_SKIP();
  const auto table = PositionalTable::build(kT, kD + 2);
  Tape tape;
  EXPECT_THROW(encode({tape.constant(Tensor({kN * kT, kD + 2})), kN, kT, kD + 2}, enc, table), ShapeError);
}

INSTANTIATE_TEST_SUITE_P(All, EncoderVariants,
                         ::testing::Values(EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full,
                                           EncoderVariant::none),
                         [](const auto& info) { return to_string(info.param); });

TEST(FactorizedEncoders, ModalityPermutationIsExactlyEquivariant) {
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq}) {
    ParameterStore store;
    Rng rng(4);
    const Encoder enc = make_encoder(v, store, "ftmt", config(), rng);
    const auto table = PositionalTable::build(kT, kD);
    const Tensor z = random_tensor({kN * kT, kD}, rng);
    const std::vector<std::size_t> perm{1, 2, 0};
    Tape tape;
    const Tensor y = encode({tape.constant(z), kN, kT, kD}, enc, table).z.value();
    const Tensor yp = encode({tape.constant(permute_modalities(z, perm)), kN, kT, kD}, enc, table).z.value();
    EXPECT_EQ(yp, permute_modalities(y, perm)) << to_string(v);
  }
}

TEST(FullEncoder, SingleModalityAttendsOverTimeOnly) {
  // At N=1 modality attention sees one token, so only the temporal path differs
  // from the identity; the joint encoder attends over the same T tokens.
  ParameterStore store;
  Rng rng(5);
  const auto cfg = config();
  FullEncoder full = FullEncoder::create(store, "full", cfg, rng);
  const auto table = PositionalTable::build(kT, kD);
  const Tensor z = random_tensor({kT, kD}, rng);
  Tape tape;
  const EmbeddingGrid z0{tape.constant(z), 1, kT, kD};
  Var x = add_positional(z0, table).z;
  for (const auto& layer : full.layers) x = layer.apply(x, temporal_token_groups(1, kT));
  const Tensor want = ops::add(z0.z, x).value();
  const Tensor got = encode_full(z0, full, table).z.value();
  EXPECT_EQ(got, want);
}

TEST(EncoderVariant, StringRoundTrip) {
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full, EncoderVariant::none})
    EXPECT_EQ(encoder_variant_from_string(to_string(v)), v);
  EXPECT_THROW(encoder_variant_from_string("joint"), ConfigError);
}

TEST(EncoderGradient, SimAndSeqPassFiniteDifferences) {
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq}) {
    ParameterStore store;
    Rng rng(6);
    const AttentionConfig cfg{.d = 4, .heads = 2, .d_k = 2, .d_v = 2, .layers = 1};
    const Encoder enc = make_encoder(v, store, "ftmt", cfg, rng);
    const auto table = PositionalTable::build(3, 4);
    const Tensor z = random_tensor({6, 4}, rng);
    const Tensor w = random_tensor({6, 4}, rng);
    LossBuilder f = [&](Tape& tape) {
      return ops::sum(ops::mul(encode({tape.constant(z), 2, 3, 4}, enc, table).z, tape.constant(w)));
    };
    auto params = store.all();
    EXPECT_LT(finite_diff_check(f, params).max_rel_error, 1e-6) << to_string(v);
  }
}
