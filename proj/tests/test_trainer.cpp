#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ucf/trainer.hpp"

using namespace ucf;

namespace {

RunConfig tiny(std::uint64_t seed = 0) {
  RunConfig c;
  c.seed = seed;
  c.data.seed = seed;
  c.data.n_steps = 4;
  c.data.n_classes = 4;
  c.data.samples_per_class = 6;
  c.model.attention = {.d = 8, .heads = 2, .d_k = 4, .d_v = 4, .layers = 1};
  c.model.feature_dims = {6, 4, 5};
  c.optimizer.learning_rate = 0.01;
  c.optimizer.clip_norm = 1.0;
  c.train.epochs = 3;
  c.train.batch_size = 4;
  return c;
}

}  // namespace

TEST(Model, ParameterCountMatchesClosedForm) {
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full, EncoderVariant::none}) {
    for (bool mcanet : {true, false}) {
      RunConfig c = tiny();
      c.model.encoder_variant = v;
      c.model.enable_mcanet = mcanet;
      const Model m = Model::create(c.model, c.data, 1);
      EXPECT_EQ(m.store.scalar_count(), expected_parameter_count(c.model, c.data)) << to_string(v) << mcanet;
    }
  }
}

TEST(Model, ForwardShapesAndProbabilities) {
  const RunConfig c = tiny();
  const Dataset data = generate_dataset(c.data);
  const Model m = Model::create(c.model, c.data, 2);
  Tape tape;
  const ForwardResult out = forward(tape, m, data.samples[0]);
  EXPECT_EQ(out.probs.shape(), (Shape{4}));
  EXPECT_EQ(out.encoded.z.shape(), (Shape{12, 8}));
  double s = 0.0;
  for (double p : out.probs.value().data) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
  ASSERT_TRUE(out.fusion.has_value());
  EXPECT_EQ(out.fusion->gates.size(), 2u);
}

TEST(Model, SingleModalityHasNoContrastiveTerm) {
  RunConfig c = tiny();
  c.model.active_modalities = {false, true, false};
  const Dataset data = generate_dataset(c.data);
  const Model m = Model::create(c.model, c.data, 3);
  EXPECT_EQ(m.effective_variant(), EncoderVariant::full);
  Tape tape;
  const auto out = forward(tape, m, data.samples[1]);
  const SampleLoss loss = sample_loss(out, m, data.samples[1].label, c.loss);
  EXPECT_EQ(loss.contrast.item(), 0.0);
  EXPECT_EQ(loss.total.item(), loss.ce.item());
}

TEST(Model, BaselineSkipsEncoderAndFusion) {
  RunConfig c = tiny();
  c.model.encoder_variant = EncoderVariant::none;
  c.model.enable_mcanet = false;
  const Dataset data = generate_dataset(c.data);
  const Model m = Model::create(c.model, c.data, 4);
  Tape tape;
  const auto out = forward(tape, m, data.samples[0]);
  EXPECT_FALSE(out.fusion.has_value());
  EXPECT_EQ(out.encoded.z.value(), out.initial.z.value());
  EXPECT_EQ(m.head.in_dim(), 3u * 4 * 8);
}

TEST(Model, MismatchedSampleIsShapeError) {
  const RunConfig c = tiny();
  const Model m = Model::create(c.model, c.data, 5);
  MultimodalSample s;
  s.inputs = {Tensor({4, 16}), Tensor({4, 12})};
  Tape tape;
  EXPECT_THROW(forward(tape, m, s), ShapeError);
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  RunConfig c = tiny();
  c.optimizer.learning_rate = 0.0;
  const Dataset data = generate_dataset(c.data);
  Model m = Model::create(c.model, c.data, c.seed);
  const auto before = m.store.snapshot();
  const TrainRun run = train(data, m, c);
  EXPECT_EQ(m.store.snapshot(), before);
  // Validation order is fixed; training batches are reshuffled, so only the
  // summation order of the train loss changes.
  for (const auto& e : run.epochs) {
    EXPECT_EQ(e.val_loss, run.epochs[0].val_loss);
    EXPECT_EQ(e.val_accuracy, run.epochs[0].val_accuracy);
    EXPECT_NEAR(e.train_loss, run.epochs[0].train_loss, 1e-12);
  }
}

TEST(Train, SameSeedIsBitIdentical) {
  const TrainRun a = run_experiment(tiny(7));
  const TrainRun b = run_experiment(tiny(7));
  EXPECT_EQ(metrics_jsonl(a), metrics_jsonl(b));
  EXPECT_EQ(confusion_csv(a), confusion_csv(b));
  ASSERT_EQ(a.epochs.size(), b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) EXPECT_EQ(a.epochs[i].train_loss, b.epochs[i].train_loss);
}

TEST(Train, LossDecreasesOnTheTrainingSplit) {
  RunConfig c = tiny(1);
  c.train.epochs = 15;
  c.train.patience = 0;
  const TrainRun run = run_experiment(c);
  EXPECT_LT(run.epochs.back().train_loss, run.epochs.front().train_loss);
}

TEST(Train, OutputsEmbedConfigAndSeed) {
  const TrainRun run = run_experiment(tiny(9));
  const std::string jsonl = metrics_jsonl(run);
  const auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  EXPECT_EQ(first.at("seed"), 9);
  EXPECT_EQ(first.at("config"), to_json(run.config));
  EXPECT_NE(confusion_csv(run).find("seed=9"), std::string::npos);
}

TEST(Evaluate, ConfusionCountsTheTestSplit) {
  const RunConfig c = tiny();
  const Dataset data = generate_dataset(c.data);
  const Model m = Model::create(c.model, c.data, 0);
  const EvalResult r = evaluate(m, data, Partition::test, c.loss);
  std::size_t total = 0, hits = 0;
  for (std::size_t i = 0; i < r.confusion.size(); ++i)
    for (std::size_t j = 0; j < r.confusion[i].size(); ++j) {
      total += r.confusion[i][j];
      if (i == j) hits += r.confusion[i][j];
    }
  EXPECT_EQ(total, data.indices(Partition::test).size());
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(hits) / total);
}

TEST(MeasureAlignment, UntrainedProjectionsAreNearOrthogonal) {
  // Independent random projections of each modality; attention encoders share
  // positional and mixed content across modalities, so only the encoder-free
  // model is expected near zero.
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RunConfig c = tiny(seed);
    c.model.attention = {.d = 64, .heads = 4, .d_k = 16, .d_v = 16, .layers = 1};
    c.model.encoder_variant = EncoderVariant::none;
    const Dataset data = generate_dataset(c.data);
    const Model m = Model::create(c.model, c.data, seed);
    for (double s : measure_alignment(m, data, Partition::test)) sum += s;
  }
  EXPECT_LT(std::abs(sum / 10.0), 0.2);
}

TEST(MeasureAlignment, CopiedFeaturesGiveOne) {
  RunConfig c = tiny();
  c.model.encoder_variant = EncoderVariant::none;
  c.model.feature_dims = {5, 5, 5};
  c.data.raw_dims = {12, 12, 12};
  Dataset data = generate_dataset(c.data);
  for (auto& s : data.samples) s.inputs[1] = s.inputs[2] = s.inputs[0];
  Model m = Model::create(c.model, c.data, 0);
  // Same weights and inputs for every modality, so every grid slice is identical.
  for (std::size_t n = 1; n < 3; ++n) {
    auto& dst = m.backbones[n];
    const auto& src = m.backbones[0];
    dst.w1->value = src.w1->value;
    dst.b1->value = src.b1->value;
    dst.w2->value = src.w2->value;
    dst.b2->value = src.b2->value;
    m.projection.maps[n]->value = m.projection.maps[0]->value;
  }
  for (double s : measure_alignment(m, data, Partition::test)) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(MeasureAlignment, SingleModalityIsContractError) {
  RunConfig c = tiny();
  c.model.active_modalities = {true, false, false};
  const Dataset data = generate_dataset(c.data);
  const Model m = Model::create(c.model, c.data, 0);
  EXPECT_THROW(measure_alignment(m, data, Partition::test), ContractError);
}

TEST(Gradcheck, TinyModelPassesForBothFactorizedVariants) {
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq}) {
    RunConfig c = tiny();
    c.model.attention = {.d = 16, .heads = 2, .d_k = 8, .d_v = 8, .layers = 2};
    c.model.encoder_variant = v;
    EXPECT_LT(gradcheck_model(c).max_rel_error, 1e-4) << to_string(v);
  }
}

TEST(Checkpoint, RoundTripsWeightsAndConfig) {
  const RunConfig c = tiny(3);
  const Dataset data = generate_dataset(c.data);
  Model m = Model::create(c.model, c.data, c.seed);
  train(data, m, c);
  const auto file = std::filesystem::temp_directory_path() / "ucf_test_checkpoint.bin";
  save_checkpoint(file, m, c);
  const Checkpoint back = load_checkpoint(file);
  EXPECT_EQ(to_json(back.config), to_json(c));
  EXPECT_EQ(back.model.store.snapshot(), m.store.snapshot());
  EXPECT_EQ(evaluate(back.model, data, Partition::test, c.loss).accuracy,
            evaluate(m, data, Partition::test, c.loss).accuracy);
  std::filesystem::remove(file);
}
