#include "ucf/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "ucf/config.hpp"

namespace ucf {

std::string to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::val: return "val";
    case Partition::test: return "test";
  }
  return "train";
}

Partition partition_from_string(const std::string& s) {
  if (s == "train") return Partition::train;
  if (s == "val") return Partition::val;
  if (s == "test") return Partition::test;
  throw InputError("unknown partition: " + s);
}

void DatasetConfig::validate() const {
  if (n_modalities == 0) throw ConfigError("data.n_modalities must be positive");
  if (n_steps == 0) throw ConfigError("data.n_steps must be positive");
  if (n_classes == 0) throw ConfigError("data.n_classes must be positive");
  if (latent_dim == 0) throw ConfigError("data.latent_dim must be positive");
  if (samples_per_class == 0) throw ConfigError("data.samples_per_class must be positive");
  if (raw_dims.size() != n_modalities) throw ConfigError("data.raw_dims must have n_modalities entries");
  if (noise_sigma.size() != n_modalities) throw ConfigError("data.noise_sigma must have n_modalities entries");
  if (informative_masks.size() != n_modalities) {
    throw ConfigError("data.informative_masks must have n_modalities entries");
  }
  for (auto r : raw_dims)
    if (r < 1) throw ConfigError("data.raw_dims entries must be >= 1");
  for (double s : noise_sigma)
    if (!(s >= 0.0)) throw ConfigError("data.noise_sigma entries must be non-negative");
  if (!(jitter_sigma >= 0.0)) throw ConfigError("data.jitter_sigma must be non-negative");
  if (!std::isfinite(drift_amplitude)) throw ConfigError("data.drift_amplitude must be finite");
  if (!std::isfinite(anchor_scale)) throw ConfigError("data.anchor_scale must be finite");
  if (!(time_shift >= 0.0) || !std::isfinite(time_shift)) {
    throw ConfigError("data.time_shift must be a finite number >= 0");
  }

  std::vector<char> covered(latent_dim, 0);
  for (const auto& mask : informative_masks) {
    if (mask.empty()) throw ConfigError("data.informative_masks entries must be non-empty");
    std::vector<char> seen(latent_dim, 0);
    for (auto j : mask) {
      if (j >= latent_dim) throw ConfigError("data.informative_masks index out of latent range");
      if (seen[j]) throw ConfigError("data.informative_masks has a repeated index");
      seen[j] = covered[j] = 1;
    }
    if (mask.size() == latent_dim && n_modalities > 1) {
      throw ConfigError("data.informative_masks: no single mask may cover every latent coordinate");
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw ConfigError("data.informative_masks must jointly cover every latent coordinate");
  }
  if (class_pairing && n_classes > 1 && n_modalities < 2) {
    throw ConfigError("data.class_pairing needs at least two modalities");
  }
  if (class_pairing && n_classes == 2) throw ConfigError("data.class_pairing needs n_classes != 2");

  const auto& s = split;
  if (s.train < 0 || s.val < 0 || s.test < 0) throw ConfigError("data.split fractions must be non-negative");
  if (std::abs(s.train + s.val + s.test - 1.0) > 1e-9) throw ConfigError("data.split fractions must sum to 1");
}

std::vector<std::size_t> Dataset::indices(Partition p) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < partitions.size(); ++i)
    if (partitions[i] == p) out.push_back(i);
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Class groups seen by modality n: pairs from round n of a round-robin schedule.
std::vector<std::size_t> modality_groups(std::size_t n_classes, std::size_t modality) {
  std::vector<std::size_t> group(n_classes);
  std::iota(group.begin(), group.end(), 0);
  if (n_classes < 3) return group;
  const std::size_t players = n_classes + (n_classes % 2);
  const std::size_t rounds = players - 1;
  const std::size_t r = modality % rounds;
  auto link = [&](std::size_t a, std::size_t b) {
    if (a >= n_classes || b >= n_classes) return;
    const std::size_t g = std::min(group[a], group[b]);
    group[a] = group[b] = g;
  };
  link(r, players - 1);
  for (std::size_t i = 1; i < players / 2; ++i) link((r + i) % rounds, (r + rounds - i) % rounds);
  return group;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

struct LatentModel {
  std::vector<std::vector<std::size_t>> symbols;  // [latent][class]
  std::vector<std::vector<double>> anchor, freq, phase;  // [latent][symbol]
  std::vector<Tensor> mixing;  // raw_dims[n]×latent_dim
};

LatentModel build_latent_model(const DatasetConfig& config) {
  LatentModel lm;
  lm.symbols = class_symbols(config);
  Rng rng(splitmix64(config.seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> freq_dist(0.4, 1.2);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < config.latent_dim; ++j) {
    const std::size_t n_sym = *std::max_element(lm.symbols[j].begin(), lm.symbols[j].end()) + 1;
    std::vector<double> a(n_sym), f(n_sym), p(n_sym);
    for (std::size_t s = 0; s < n_sym; ++s) {
      a[s] = normal(rng);
      f[s] = freq_dist(rng);
      p[s] = phase_dist(rng);
    }
    lm.anchor.push_back(std::move(a));
    lm.freq.push_back(std::move(f));
    lm.phase.push_back(std::move(p));
  }
  for (std::size_t n = 0; n < config.n_modalities; ++n) {
    Tensor a({config.raw_dims[n], config.latent_dim});
    const double sc = 1.0 / std::sqrt(static_cast<double>(config.informative_masks[n].size()));
    for (auto& v : a.data) v = normal(rng) * sc;
    lm.mixing.push_back(std::move(a));
  }
  return lm;
}

Tensor trajectory(const DatasetConfig& config, const LatentModel& lm, std::size_t cls, double shift = 0.0) {
  Tensor u({config.n_steps, config.latent_dim});
  for (std::size_t t = 0; t < config.n_steps; ++t) {
    for (std::size_t j = 0; j < config.latent_dim; ++j) {
      const std::size_t s = lm.symbols[j][cls];
      u(t, j) = config.anchor_scale * lm.anchor[j][s] +
                config.drift_amplitude *
                    std::sin(lm.freq[j][s] * (static_cast<double>(t) + shift) + lm.phase[j][s]);
    }
  }
  return u;
}

}  // namespace

std::vector<std::vector<std::size_t>> class_symbols(const DatasetConfig& config) {
  const std::size_t k = config.n_classes;
  std::vector<std::vector<std::size_t>> per_modality;
  for (std::size_t n = 0; n < config.n_modalities; ++n) {
    if (config.class_pairing) {
      per_modality.push_back(modality_groups(k, n));
    } else {
      std::vector<std::size_t> id(k);
      std::iota(id.begin(), id.end(), 0);
      per_modality.push_back(std::move(id));
    }
  }
  std::vector<std::vector<std::size_t>> symbols(config.latent_dim);
  for (std::size_t j = 0; j < config.latent_dim; ++j) {
    std::vector<std::size_t> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t n = 0; n < config.n_modalities; ++n) {
      const auto& mask = config.informative_masks[n];
      if (std::find(mask.begin(), mask.end(), j) == mask.end()) continue;
      for (std::size_t c = 0; c < k; ++c) {
        const auto a = find_root(parent, c), b = find_root(parent, per_modality[n][c]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
    // Dense symbol ids in order of first class occurrence.
    std::vector<std::size_t> sym(k), remap(k, k);
    std::size_t next = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const auto r = find_root(parent, c);
      if (remap[r] == k) remap[r] = next++;
      sym[c] = remap[r];
    }
    symbols[j] = std::move(sym);
  }
  return symbols;
}

Tensor class_trajectory(const DatasetConfig& config, std::size_t cls) {
  config.validate();
  if (cls >= config.n_classes) throw InputError("class index out of range");
  return trajectory(config, build_latent_model(config), cls);
}

Dataset generate_dataset(const DatasetConfig& config) {
  config.validate();
  const LatentModel lm = build_latent_model(config);

  Dataset ds;
  ds.config = config;
  const std::size_t total = config.n_classes * config.samples_per_class;
  ds.samples.resize(total);
  ds.partitions.resize(total, Partition::train);
  const std::size_t T = config.n_steps;

  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t cls = idx / config.samples_per_class;
    Rng rng(splitmix64(config.seed ^ static_cast<std::uint64_t>(idx)));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> shift(0.0, config.time_shift);
    Tensor latent = trajectory(config, lm, cls, config.time_shift > 0.0 ? shift(rng) : 0.0);
    for (auto& v : latent.data) v += config.jitter_sigma * normal(rng);

    MultimodalSample sample;
    sample.label = cls;
    for (std::size_t n = 0; n < config.n_modalities; ++n) {
      const std::size_t raw = config.raw_dims[n];
      const Tensor& a = lm.mixing[n];
      Tensor x({T, raw});
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t r = 0; r < raw; ++r) {
          double acc = 0.0;
          for (auto j : config.informative_masks[n]) acc += a(r, j) * latent(t, j);
          x(t, r) = acc + config.noise_sigma[n] * normal(rng);
        }
      }
      sample.inputs.push_back(std::move(x));
    }
    ds.samples[idx] = std::move(sample);
  }

  const auto& s = config.split;
  const std::size_t per = config.samples_per_class;
  const auto n_train = static_cast<std::size_t>(std::llround(s.train * static_cast<double>(per)));
  const auto n_val = std::min(per - std::min(per, n_train),
                              static_cast<std::size_t>(std::llround(s.val * static_cast<double>(per))));
  Rng split_rng(splitmix64(config.seed ^ 0x5eedf00dULL));
  for (std::size_t c = 0; c < config.n_classes; ++c) {
    std::vector<std::size_t> order(per);
    std::iota(order.begin(), order.end(), c * per);
    std::shuffle(order.begin(), order.end(), split_rng);
    for (std::size_t i = 0; i < per; ++i) {
      ds.partitions[order[i]] = i < n_train ? Partition::train
                                : i < n_train + n_val ? Partition::val
                                                      : Partition::test;
    }
  }
  return ds;
}

std::vector<double> resample_to_common_rate(std::span<const double> times,
                                            std::span<const double> values, std::size_t steps) {
  Tensor col({values.size(), 1}, std::vector<double>(values.begin(), values.end()));
  return resample_to_common_rate(times, col, steps).data;
}

Tensor resample_to_common_rate(std::span<const double> times, const Tensor& values,
                               std::size_t steps) {
  if (times.size() < 2) throw InputError("resample: need at least 2 points");
  if (values.rank() != 2 || values.shape[0] != times.size()) {
    throw ShapeError("resample: values " + shape_str(values.shape) + " vs " +
                     std::to_string(times.size()) + " timestamps");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InputError("resample: timestamps must be strictly increasing");
  }
  if (steps == 0) throw InputError("resample: target length must be positive");
  const std::size_t ch = values.shape[1];
  Tensor out({steps, ch});
  const double t0 = times.front(), t1 = times.back();
  std::size_t seg = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double target =
        steps == 1 ? t0
                   : (s + 1 == steps ? t1 : t0 + (t1 - t0) * static_cast<double>(s) / static_cast<double>(steps - 1));
    while (seg + 2 < times.size() && times[seg + 1] < target) ++seg;
    const double w = (target - times[seg]) / (times[seg + 1] - times[seg]);
    for (std::size_t c = 0; c < ch; ++c) {
      const double a = values(seg, c), b = values(seg + 1, c);
      out(s, c) = w == 0.0 ? a : (w == 1.0 ? b : a + w * (b - a));
    }
  }
  return out;
}

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> b) : bytes_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw InputError("sample file truncated");
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::string sample_file_name(std::size_t idx) {
  std::ostringstream os;
  os << "sample_" << std::setw(6) << std::setfill('0') << idx << ".bin";
  return os.str();
}

}  // namespace

std::vector<unsigned char> encode_sample(const MultimodalSample& sample) {
  std::vector<unsigned char> out;
  put_u32(out, static_cast<std::uint32_t>(sample.inputs.size()));
  for (const auto& x : sample.inputs) {
    put_u32(out, static_cast<std::uint32_t>(x.rows()));
    put_u32(out, static_cast<std::uint32_t>(x.cols()));
  }
  for (const auto& x : sample.inputs)
    for (double v : x.data) put_f64(out, v);
  return out;
}

MultimodalSample decode_sample(std::span<const unsigned char> bytes) {
  ByteReader r(bytes);
  const std::uint32_t n = r.u32();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(n);
  for (auto& d : dims) {
    d.first = r.u32();
    d.second = r.u32();
  }
  MultimodalSample s;
  for (const auto& [t, raw] : dims) {
    Tensor x({t, raw});
    for (auto& v : x.data) v = r.f64();
    s.inputs.push_back(std::move(x));
  }
  if (!r.done()) throw InputError("sample file has trailing bytes");
  return s;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "samples");
  nlohmann::json manifest;
  manifest["format"] = "ucf-dataset-v1";
  manifest["config"] = to_json(dataset.config);
  manifest["samples"] = nlohmann::json::array();
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const std::string name = sample_file_name(i);
    const auto bytes = encode_sample(dataset.samples[i]);
    std::ofstream f(dir / "samples" / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (dir / "samples" / name).string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    manifest["samples"].push_back({{"file", "samples/" + name},
                                   {"label", dataset.samples[i].label},
                                   {"partition", to_string(dataset.partitions[i])}});
  }
  std::ofstream m(dir / "manifest.json");
  if (!m) throw InputError("cannot write " + (dir / "manifest.json").string());
  m << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream m(dir / "manifest.json");
  if (!m) throw InputError("cannot read " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    m >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
  Dataset ds;
  ds.config = dataset_config_from_json(manifest.at("config"));
  for (const auto& entry : manifest.at("samples")) {
    std::ifstream f(dir / entry.at("file").get<std::string>(), std::ios::binary);
    if (!f) throw InputError("cannot read sample " + entry.at("file").get<std::string>());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    MultimodalSample s = decode_sample(bytes);
    s.label = entry.at("label").get<std::size_t>();
    if (s.label >= ds.config.n_classes) throw InputError("sample label out of range");
    ds.samples.push_back(std::move(s));
    ds.partitions.push_back(partition_from_string(entry.at("partition").get<std::string>()));
  }
  return ds;
}

}  // namespace ucf
