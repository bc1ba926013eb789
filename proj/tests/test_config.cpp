#include <gtest/gtest.h>

#include "ucf/acceptance.hpp"
#include "ucf/config.hpp"

using namespace ucf;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig c;
  const json j = to_json(c);
  EXPECT_EQ(to_json(run_config_from_json(j)), j);
}

TEST(RunConfig, EditedValuesRoundTrip) {
  RunConfig c;
  c.seed = 42;
  c.model.encoder_variant = EncoderVariant::seq;
  c.model.attention.d = 24;
  c.model.active_modalities = {true, false, true};
  c.model.enable_mcanet = false;
  c.data.noise_sigma = {0.1, 0.2, 0.3};
  c.data.time_shift = 1.5;
  c.optimizer.clip_norm = 2.0;
  c.loss.alpha = 0.0;
  c.train.patience = 0;
  const json j = to_json(c);
  const RunConfig back = parse_run_config(j.dump());
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.model.encoder_variant, EncoderVariant::seq);
  EXPECT_EQ(back.model.active_modalities, (std::vector<bool>{true, false, true}));
}

TEST(RunConfig, MissingKeysKeepDefaults) {
  const RunConfig c = parse_run_config(R"({"seed": 3, "model": {"d": 16}})");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.model.attention.d, 16u);
  EXPECT_EQ(c.model.attention.heads, AttentionConfig{}.heads);
  EXPECT_EQ(c.train.epochs, TrainConfig{}.epochs);
}

TEST(RunConfig, UnknownKeyNamesItsPath) {
  EXPECT_NE(error_of(R"({"model": {"dropout": 0.1}})").find("model.dropout"), std::string::npos);
  EXPECT_NE(error_of(R"({"extra": 1})").find("extra"), std::string::npos);
}

TEST(RunConfig, WrongTypesNameTheirPath) {
  EXPECT_NE(error_of(R"({"optimizer": {"learning_rate": "fast"}})").find("optimizer.learning_rate"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"data": {"n_classes": -2}})").find("data.n_classes"), std::string::npos);
  EXPECT_NE(error_of(R"({"model": {"encoder_variant": "joint"}})").find("encoder_variant"), std::string::npos);
}

TEST(RunConfig, SemanticValidationRuns) {
  EXPECT_FALSE(error_of(R"({"model": {"heads": 0}})").empty());
  EXPECT_FALSE(error_of(R"({"model": {"main_modality": 7}})").empty());
  EXPECT_FALSE(error_of(R"({"loss": {"alpha": -1}})").empty());
  EXPECT_FALSE(error_of("not json").empty());
}

TEST(ShippedConfigs, DeskFileMatchesTheAcceptancePreset) {
  const RunConfig file = load_run_config(UCF_SOURCE_DIR "/configs/desk.json");
  EXPECT_EQ(to_json(file), to_json(acceptance::desk_config()));
}

TEST(ShippedConfigs, TinyFileParses) {
  const RunConfig tiny = load_run_config(UCF_SOURCE_DIR "/configs/tiny.json");
  EXPECT_EQ(tiny.model.attention.d, 16u);
  EXPECT_EQ(tiny.data.n_steps, 4u);
}
