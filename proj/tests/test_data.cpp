#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <set>

#include "ucf/data.hpp"

using namespace ucf;

namespace {

DatasetConfig small_config(std::uint64_t seed = 0) {
  DatasetConfig c;
  c.samples_per_class = 10;
  c.seed = seed;
  return c;
}

// Ridge-regularized least-squares one-vs-rest probe on the flattened inputs
// of the chosen modalities: fit on train, accuracy on test.
double linear_probe_accuracy(const Dataset& data, const std::vector<std::size_t>& modalities) {
  auto features = [&](const MultimodalSample& s) {
    std::vector<double> f{1.0};
    for (std::size_t n : modalities) f.insert(f.end(), s.inputs[n].data.begin(), s.inputs[n].data.end());
    return f;
  };
  const auto train = data.indices(Partition::train);
  const auto test = data.indices(Partition::test);
  const std::size_t dim = features(data.samples[0]).size();
  const std::size_t classes = data.config.n_classes;
  Eigen::MatrixXd x(train.size(), dim), y = Eigen::MatrixXd::Zero(train.size(), classes);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto f = features(data.samples[train[i]]);
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = f[j];
    y(i, data.samples[train[i]].label) = 1.0;
  }
  const Eigen::MatrixXd gram = x.transpose() * x + 1e-1 * Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd w = gram.ldlt().solve(x.transpose() * y);
  std::size_t hits = 0;
  for (std::size_t i : test) {
    const auto f = features(data.samples[i]);
    Eigen::RowVectorXd row(dim);
    for (std::size_t j = 0; j < dim; ++j) row(j) = f[j];
    Eigen::Index pred = 0;
    (row * w).maxCoeff(&pred);
    hits += static_cast<std::size_t>(pred) == data.samples[i].label;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace

TEST(GenerateDataset, SameSeedIsBitIdentical) {
  const Dataset a = generate_dataset(small_config(4));
  const Dataset b = generate_dataset(small_config(4));
  ASSERT_EQ(a.samples.size(), b.samples.size());
  EXPECT_EQ(a.partitions, b.partitions);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].label, b.samples[i].label);
    EXPECT_EQ(a.samples[i].inputs, b.samples[i].inputs);
  }
}

TEST(GenerateDataset, NoiselessSamplesOfAClassAreIdentical) {
  DatasetConfig c = small_config(2);
  c.noise_sigma = {0.0, 0.0, 0.0};
  c.jitter_sigma = 0.0;
  const Dataset d = generate_dataset(c);
  std::vector<const MultimodalSample*> first(c.n_classes, nullptr);
  for (const auto& s : d.samples) {
    if (!first[s.label]) {
      first[s.label] = &s;
      continue;
    }
    EXPECT_EQ(s.inputs, first[s.label]->inputs);
  }
}

TEST(GenerateDataset, ShapesAndSplitFollowConfig) {
  const DatasetConfig c = small_config();
  const Dataset d = generate_dataset(c);
  EXPECT_EQ(d.samples.size(), c.n_classes * c.samples_per_class);
  for (const auto& s : d.samples) {
    ASSERT_EQ(s.inputs.size(), c.n_modalities);
    for (std::size_t n = 0; n < c.n_modalities; ++n)
      EXPECT_EQ(s.inputs[n].shape, (Shape{c.n_steps, c.raw_dims[n]}));
  }
  const std::size_t total = d.samples.size();
  EXPECT_EQ(d.indices(Partition::train).size() + d.indices(Partition::val).size() +
                d.indices(Partition::test).size(),
            total);
  EXPECT_NEAR(static_cast<double>(d.indices(Partition::train).size()) / total, c.split.train, 0.05);
}

TEST(GenerateDataset, RejectsDegenerateConfigs) {
  DatasetConfig c;
  c.raw_dims = {16, 0, 9};
  EXPECT_THROW(generate_dataset(c), ConfigError);
  c = DatasetConfig{};
  c.split = {0.6, 0.3, 0.2};
  EXPECT_THROW(generate_dataset(c), ConfigError);
  c = DatasetConfig{};
  c.noise_sigma = {0.3, 0.3};
  EXPECT_THROW(generate_dataset(c), ConfigError);
}

TEST(GenerateDataset, FusionIsNeededForALinearProbe) {
  // Independent least-squares oracle: each modality alone leaves class pairs
  // ambiguous, all three together do not.
  DatasetConfig c;
  c.seed = 1;
  c.samples_per_class = 60;
  const Dataset d = generate_dataset(c);
  double best_single = 0.0;
  for (std::size_t n = 0; n < 3; ++n) best_single = std::max(best_single, linear_probe_accuracy(d, {n}));
  const double all = linear_probe_accuracy(d, {0, 1, 2});
  EXPECT_LT(best_single, 0.8);
  EXPECT_GT(all, best_single + 0.15);
}

TEST(ClassSymbols, PairingLeavesEveryModalityAmbiguous) {
  const DatasetConfig c;
  const auto symbols = class_symbols(c);
  for (std::size_t n = 0; n < c.n_modalities; ++n) {
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t cls = 0; cls < c.n_classes; ++cls) {
      std::vector<std::size_t> code;
      for (std::size_t j : c.informative_masks[n]) code.push_back(symbols[j][cls]);
      seen.insert(code);
    }
    EXPECT_LT(seen.size(), c.n_classes) << "modality " << n;
  }
}

TEST(Resample, ConstantSeriesStaysConstant) {
  const std::vector<double> t{0, 1, 3}, v{2, 2, 2};
  for (double x : resample_to_common_rate(t, v, 5)) EXPECT_EQ(x, 2.0);
}

TEST(Resample, LinearRampIsExact) {
  const std::vector<double> t{0, 10}, v{0, 10};
  EXPECT_EQ(resample_to_common_rate(t, v, 3), (std::vector<double>{0, 5, 10}));
}

TEST(Resample, UniformSeriesOfLengthTIsIdentity) {
  const std::vector<double> t{0, 1, 2, 3}, v{4, -1, 2, 8};
  EXPECT_EQ(resample_to_common_rate(t, v, 4), v);
}

TEST(Resample, FewerThanTwoPointsIsInputError) {
  const std::vector<double> t{0}, v{1};
  EXPECT_THROW(resample_to_common_rate(t, v, 3), InputError);
}

TEST(DatasetIo, RoundTripsThroughDisk) {
  const Dataset d = generate_dataset(small_config(8));
  const auto dir = std::filesystem::temp_directory_path() / "ucf_test_dataset_io";
  std::filesystem::remove_all(dir);
  write_dataset(d, dir);
  const Dataset back = read_dataset(dir);
  EXPECT_EQ(back.partitions, d.partitions);
  ASSERT_EQ(back.samples.size(), d.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].label, d.samples[i].label);
    EXPECT_EQ(back.samples[i].inputs, d.samples[i].inputs);
  }
  std::filesystem::remove_all(dir);
}

TEST(DatasetIo, SampleCodecRoundTrips) {
  const Dataset d = generate_dataset(small_config(3));
  const auto bytes = encode_sample(d.samples[5]);
  EXPECT_EQ(decode_sample(bytes).inputs, d.samples[5].inputs);
}
