#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ucf/optim.hpp"

using namespace ucf;

namespace {

Parameter with_grad(double value, double grad) {
  Parameter p("p", Tensor::scalar(value));
  p.grad = {grad};
  p.has_grad = true;
  return p;
}

}  // namespace

TEST(Sgd, PlainGradientDescent) {
  Parameter p = with_grad(1.0, 2.0);
  std::vector<Parameter*> ps{&p};
  sgd_step(ps, {.learning_rate = 0.1, .momentum = 0.0});
  EXPECT_DOUBLE_EQ(p.value[0], 0.8);
}

TEST(Sgd, MomentumRecurrence) {
  Parameter p = with_grad(0.0, 1.0);
  std::vector<Parameter*> ps{&p};
  const OptimizerConfig cfg{.learning_rate = 1.0, .momentum = 0.9};
  sgd_step(ps, cfg);
  EXPECT_DOUBLE_EQ(p.value[0], -1.0);
  p.grad = {1.0};
  p.has_grad = true;
  sgd_step(ps, cfg);
  EXPECT_DOUBLE_EQ(p.value[0], -2.9);
}

TEST(Sgd, ZeroGradientDecaysVelocityOnly) {
  Parameter p = with_grad(0.5, 0.0);
  p.velocity = Tensor::scalar(1.0);
  std::vector<Parameter*> ps{&p};
  sgd_step(ps, {.learning_rate = 0.0, .momentum = 0.9});
  EXPECT_EQ(p.value[0], 0.5);
  EXPECT_DOUBLE_EQ(p.velocity[0], 0.9);
}

TEST(Sgd, MissingGradientIsContractError) {
  Parameter p("p", Tensor::scalar(1.0));
  std::vector<Parameter*> ps{&p};
  EXPECT_THROW(sgd_step(ps, {}), ContractError);
}

TEST(Sgd, GradientsAreZeroedAfterTheStep) {
  Parameter p = with_grad(1.0, 3.0);
  std::vector<Parameter*> ps{&p};
  sgd_step(ps, {});
  EXPECT_EQ(p.grad[0], 0.0);
}

TEST(Sgd, ClipScalesToTheGlobalNorm) {
  Parameter a = with_grad(0.0, 3.0), b = with_grad(0.0, 4.0);
  std::vector<Parameter*> ps{&a, &b};
  EXPECT_DOUBLE_EQ(grad_norm(ps), 5.0);
  sgd_step(ps, {.learning_rate = 1.0, .momentum = 0.0, .clip_norm = 1.0});
  EXPECT_DOUBLE_EQ(a.value[0], -0.6);
  EXPECT_DOUBLE_EQ(b.value[0], -0.8);
}

TEST(Sgd, ClipLeavesSmallGradientsAlone) {
  Parameter a = with_grad(0.0, 0.3);
  std::vector<Parameter*> ps{&a};
  sgd_step(ps, {.learning_rate = 1.0, .momentum = 0.0, .clip_norm = 1.0});
  EXPECT_DOUBLE_EQ(a.value[0], -0.3);
}

TEST(OptimizerConfig, RejectsInvalidValues) {
  EXPECT_THROW((OptimizerConfig{.learning_rate = -1.0}).validate(), ConfigError);
  EXPECT_THROW((OptimizerConfig{.momentum = 1.5}).validate(), ConfigError);
  EXPECT_THROW((OptimizerConfig{.clip_norm = -0.1}).validate(), ConfigError);
  EXPECT_NO_THROW((OptimizerConfig{.learning_rate = 0.0}).validate());
}

TEST(FiniteDiff, SquareHasExactSlope) {
  Parameter x("x", Tensor::scalar(3.0));
  std::vector<Parameter*> ps{&x};
  LossBuilder f = [&](Tape& t) {
    Var v = t.parameter(x);
    return ops::sum(ops::mul(v, v));
  };
  const auto r = finite_diff_check(f, ps);
  EXPECT_NEAR(r.worst_analytic, 6.0, 1e-12);
  EXPECT_LT(r.max_rel_error, 1e-9);
}

TEST(FiniteDiff, ConstantFunctionHasZeroError) {
  Parameter x("x", Tensor::vector({1.0, 2.0}));
  std::vector<Parameter*> ps{&x};
  LossBuilder f = [&](Tape& t) {
    t.parameter(x);
    return ops::sum(t.constant(Tensor::scalar(4.0)));
  };
  const auto r = finite_diff_check(f, ps);
  EXPECT_EQ(r.max_rel_error, 0.0);
  EXPECT_EQ(r.worst_analytic, 0.0);
  EXPECT_EQ(r.worst_numeric, 0.0);
}

TEST(FiniteDiff, DetectsAWrongGradient) {
  Parameter x("x", Tensor::scalar(0.7));
  std::vector<Parameter*> ps{&x};
  // Stops the gradient through one factor, so the analytic slope is half the true one.
  LossBuilder f = [&](Tape& t) {
    Var v = t.parameter(x);
    return ops::sum(ops::mul(v, t.constant(x.value)));
  };
  EXPECT_GT(finite_diff_check(f, ps).max_rel_error, 0.1);
}
