#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "ucf/fusion.hpp"

using namespace ucf;
using ucf::testing::random_tensor;

namespace {

constexpr double kGateLo = 0.2689414213699951;  // sigmoid(-1)
constexpr double kGateHi = 0.7310585786300049;  // sigmoid(1)

EmbeddingGrid grid_of(Tape& tape, const Tensor& z, std::size_t n, std::size_t t) {
  return {tape.constant(z), n, t, z.cols()};
}

}  // namespace

TEST(CosineSim, ReferenceValues) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{2, 0}, d{-3, 0}, z{0, 0};
  EXPECT_EQ(cosine_sim(a, b), 0.0);
  EXPECT_EQ(cosine_sim(a, c), 1.0);
  EXPECT_EQ(cosine_sim(a, d), -1.0);
  EXPECT_EQ(cosine_sim(a, z), 0.0);
  EXPECT_THROW(cosine_sim(a, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(CosineSim, ScaleInvariantForPowersOfTwo) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Tensor a = random_tensor({7}, rng), b = random_tensor({7}, rng);
    Tensor b4 = b;
    for (auto& v : b4.data) v *= 4.0;
    EXPECT_EQ(cosine_sim(a.data, b.data), cosine_sim(a.data, b4.data));
  }
}

TEST(Fuse, GatesStayInsideTheSigmoidBand) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Tensor z = random_tensor({3 * 5, 6}, rng, -4, 4);
    Tape tape;
    const Tensor g = fuse(grid_of(tape, z, 3, 5), ModalityRoles::with_main(3, seed % 3)).gate_values();
    EXPECT_EQ(g.shape, (Shape{2, 5}));
    for (double v : g.data) {
      ASSERT_GE(v, kGateLo);
      ASSERT_LE(v, kGateHi);
    }
  }
}

TEST(Fuse, IdenticalAndOppositeSubsHitTheBandEdges) {
  Rng rng(2);
  const Tensor m = random_tensor({4, 3}, rng);
  Tensor z({12, 3});
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t j = 0; j < 3; ++j) {
      z(s, j) = m(s, j);
      z(4 + s, j) = 2.0 * m(s, j);
      z(8 + s, j) = -m(s, j);
    }
  Tape tape;
  const FusionOutput out = fuse(grid_of(tape, z, 3, 4), ModalityRoles::with_main(3));
  const Tensor g = out.gate_values();
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_NEAR(g(0, s), kGateHi, 1e-15);
    EXPECT_NEAR(g(1, s), kGateLo, 1e-15);
  }
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(out.c_agg.value()(s, j), m(s, j) * (1.0 + 2.0 * g(0, s) - g(1, s)), 1e-12);
}

TEST(Fuse, GatesAreExactlyScaleInvariant) {
  Rng rng(3);
  const Tensor z = random_tensor({3 * 4, 5}, rng);
  Tensor scaled = z;
  for (std::size_t r = 4; r < 12; ++r)
    for (std::size_t j = 0; j < 5; ++j) scaled(r, j) *= 8.0;
  Tape tape;
  const auto roles = ModalityRoles::with_main(3);
  EXPECT_EQ(fuse(grid_of(tape, z, 3, 4), roles).gate_values(), fuse(grid_of(tape, scaled, 3, 4), roles).gate_values());
}

TEST(Fuse, SingleModalityReturnsMainSlice) {
  Rng rng(4);
  const Tensor z = random_tensor({4, 5}, rng);
  Tape tape;
  const FusionOutput out = fuse(grid_of(tape, z, 1, 4), ModalityRoles::with_main(1));
  EXPECT_TRUE(out.gates.empty());
  EXPECT_EQ(out.c_agg.value(), z);
}

TEST(ModalityRoles, ValidatesCoverage) {
  EXPECT_EQ(ModalityRoles::with_main(3, 1).subs, (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(ModalityRoles::with_main(3, 3), ConfigError);
  EXPECT_THROW((ModalityRoles{0, {1, 1}}).validate(3), ConfigError);
}

TEST(Classify, ZeroWeightsGiveUniformProbabilities) {
  ParameterStore store;
  Rng rng(5);
  const auto head = ClassifierHead::create(store, "head", 12, 4, 5, rng);
  for (Parameter* p : store.all())
    for (auto& v : p->value.data) v = 0.0;
  Tape tape;
  const Tensor o = classify(tape.constant(random_tensor({3, 4}, rng)), head).value();
  for (double v : o.data) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Classify, WrongInputSizeIsShapeError) {
  ParameterStore store;
  Rng rng(6);
  const auto head = ClassifierHead::create(store, "head", 12, 4, 5, rng);
  Tape tape;
  EXPECT_THROW(classify(tape.constant(Tensor({3, 5})), head), ShapeError);
}

TEST(FuseGradient, MatchesFiniteDifferences) {
  Rng rng(7);
  Parameter z("z", random_tensor({3 * 3, 4}, rng));
  std::vector<Parameter*> ps{&z};
  const Tensor w = random_tensor({3, 4}, rng);
  LossBuilder f = [&](Tape& tape) {
    return ops::sum(ops::mul(fuse({tape.parameter(z), 3, 3, 4}, ModalityRoles::with_main(3, 1)).c_agg,
                             tape.constant(w)));
  };
  EXPECT_LT(finite_diff_check(f, ps).max_rel_error, 1e-7);
}
