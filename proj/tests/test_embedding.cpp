#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "ucf/embedding.hpp"

using namespace ucf;
using ucf::testing::random_tensor;

namespace {

void fill(Parameter* p, double v) {
  for (auto& x : p->value.data) x = v;
}

}  // namespace

TEST(Backbone, ZeroWeightsGiveZeroFeatures) {
  ParameterStore store;
  Rng rng(1);
  auto bb = ToyBackbone::create(store, "bb", 0, 5, 4, rng);
  for (Parameter* p : {bb.w1, bb.b1, bb.w2, bb.b2}) fill(p, 0.0);
  Tape tape;
  const Tensor f = bb.apply(tape, random_tensor({6, 5}, rng)).value();
  EXPECT_EQ(f.shape, (Shape{6, 4}));
  for (double v : f.data) EXPECT_EQ(v, 0.0);
}

TEST(Backbone, AppliesPerStep) {
  ParameterStore store;
  Rng rng(2);
  auto bb = ToyBackbone::create(store, "bb", 0, 3, 4, rng);
  Tensor x = random_tensor({4, 3}, rng);
  for (std::size_t j = 0; j < 3; ++j) x(2, j) = x(1, j);
  Tape tape;
  const Tensor f = bb.apply(tape, x).value();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(f(1, j), f(2, j));
}

TEST(ExtractFeatures, ModalityCountMismatchIsConfigError) {
  ParameterStore store;
  Rng rng(3);
  std::vector<ToyBackbone> bbs{ToyBackbone::create(store, "a", 0, 3, 2, rng),
                               ToyBackbone::create(store, "b", 1, 3, 2, rng)};
  std::vector<Tensor> inputs{Tensor({4, 3})};
  Tape tape;
  EXPECT_THROW(extract_features(tape, inputs, bbs), ConfigError);
}

TEST(Project, IdentityMapsKeepFeatures) {
  ParameterStore store;
  Rng rng(4);
  const std::vector<std::size_t> dims{3, 3};
  auto w = ProjectionWeights::create(store, "proj", dims, 3, rng);
  for (Parameter* p : w.maps) p->value = Tensor::identity(3);
  Tape tape;
  const Tensor f0 = random_tensor({2, 3}, rng), f1 = random_tensor({2, 3}, rng);
  std::vector<Var> feats{tape.constant(f0), tape.constant(f1)};
  const EmbeddingGrid g = project(feats, w);
  EXPECT_EQ(g.modalities, 2u);
  EXPECT_EQ(g.steps, 2u);
  EXPECT_EQ(g.modality(0).value(), f0);
  EXPECT_EQ(g.modality(1).value(), f1);
}

TEST(Project, ZeroMapGivesZeroSlice) {
  ParameterStore store;
  Rng rng(5);
  const std::vector<std::size_t> dims{4, 2};
  auto w = ProjectionWeights::create(store, "proj", dims, 3, rng);
  fill(w.maps[1], 0.0);
  Tape tape;
  std::vector<Var> feats{tape.constant(random_tensor({5, 4}, rng)), tape.constant(random_tensor({5, 2}, rng))};
  for (double v : project(feats, w).modality(1).value().data) EXPECT_EQ(v, 0.0);
}

TEST(Project, MismatchNamesTheModality) {
  ParameterStore store;
  Rng rng(6);
  const std::vector<std::size_t> dims{4, 2};
  auto w = ProjectionWeights::create(store, "proj", dims, 3, rng);
  Tape tape;
  std::vector<Var> feats{tape.constant(Tensor({5, 4})), tape.constant(Tensor({5, 3}))};
  try {
    project(feats, w);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("modality 1"), std::string::npos) << e.what();
  }
}

TEST(Positional, TableMatchesSinusoidFormula) {
  const auto table = PositionalTable::build(5, 6);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double angle = static_cast<double>(t) / std::pow(10000.0, 2.0 * i / 6.0);
      EXPECT_NEAR(table.pe(t, 2 * i), std::sin(angle), 1e-15);
      EXPECT_NEAR(table.pe(t, 2 * i + 1), std::cos(angle), 1e-15);
    }
  }
}

TEST(Positional, ZeroSliceReturnsTable) {
  const auto table = PositionalTable::build(4, 8);
  Tape tape;
  EXPECT_EQ(add_positional(tape.constant(Tensor({4, 8})), table).value(), table.pe);
}

TEST(Positional, ShapeMismatchIsShapeError) {
  const auto table = PositionalTable::build(4, 8);
  Tape tape;
  EXPECT_THROW(add_positional(tape.constant(Tensor({3, 8})), table), ShapeError);
}
