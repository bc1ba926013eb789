#include "ucf/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ucf {

using nlohmann::json;

namespace {

std::size_t argmax(const Tensor& p) {
  return static_cast<std::size_t>(std::max_element(p.data.begin(), p.data.end()) - p.data.begin());
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Fisher-Yates with raw engine output so the order is the same on every
// standard library.
void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace

EvalResult evaluate(const Model& model, const Dataset& data, Partition part, const LossConfig& loss) {
  EvalResult r;
  r.confusion.assign(model.classes, std::vector<std::size_t>(model.classes, 0));
  r.similarity.assign(model.roles.subs.size(), 0.0);
  std::size_t correct = 0;
  for (std::size_t idx : data.indices(part)) {
    const MultimodalSample& s = data.samples[idx];
    Tape tape;
    const ForwardResult out = forward(tape, model, s);
    r.loss += sample_loss(out, model, s.label, loss).total.item();
    const std::size_t pred = argmax(out.probs.value());
    ++r.confusion[s.label][pred];
    correct += pred == s.label;
    const Tensor& c = out.encoded.z.value();
    for (std::size_t i = 0; i < model.roles.subs.size(); ++i) {
      double acc = 0.0;
      for (std::size_t t = 0; t < model.steps; ++t) {
        acc += cosine_sim(c.row(out.encoded.row(model.roles.main, t)),
                          c.row(out.encoded.row(model.roles.subs[i], t)));
      }
      r.similarity[i] += acc / static_cast<double>(model.steps);
    }
    ++r.count;
  }
  if (r.count > 0) {
    const double n = static_cast<double>(r.count);
    r.loss /= n;
    r.accuracy = static_cast<double>(correct) / n;
    for (auto& v : r.similarity) v /= n;
  }
  return r;
}

std::vector<double> measure_alignment(const Model& model, const Dataset& data, Partition part) {
  if (model.active.size() < 2) {
    throw ContractError("measure_alignment: needs at least two active modalities, model has " +
                        std::to_string(model.active.size()));
  }
  return evaluate(model, data, part, LossConfig{}).similarity;
}

TrainRun train(const Dataset& data, Model& model, const RunConfig& config) {
  config.train.validate();
  config.optimizer.validate();
  config.loss.validate();
  std::vector<std::size_t> order = data.indices(Partition::train);
  if (order.empty() || data.indices(Partition::val).empty() || data.indices(Partition::test).empty()) {
    throw ContractError("train: every partition must be non-empty");
  }

  TrainRun run;
  run.config = config;
  Rng rng(config.seed ^ 0x5eed5eed5eed5eedULL);

  const EvalResult initial = evaluate(model, data, Partition::val, config.loss);
  double best_acc = initial.accuracy;
  double best_loss = initial.loss;
  std::vector<Tensor> best = model.store.snapshot();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.train.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.train.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.train.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const MultimodalSample& s = data.samples[order[i]];
        Tape tape;
        const ForwardResult out = forward(tape, model, s);
        const SampleLoss l = sample_loss(out, model, s.label, config.loss);
        const double value = l.total.item();
        if (!std::isfinite(value)) {
          throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch) +
                                ", sample " + std::to_string(order[i]) + " (ce " + std::to_string(l.ce.item()) +
                                ", contrast " + std::to_string(l.contrast.item()) + ")");
        }
        loss_sum += value;
        correct += argmax(out.probs.value()) == s.label;
        tape.backward(ops::scale(l.total, inv));
      }
      sgd_step(model.store, config.optimizer);
    }

    const EvalResult val = evaluate(model, data, Partition::val, config.loss);
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    m.val_loss = val.loss;
    m.val_accuracy = val.accuracy;
    m.val_similarity = mean_of(val.similarity);
    run.epochs.push_back(m);

    if (val.accuracy > best_acc || (val.accuracy == best_acc && val.loss < best_loss)) {
      best_acc = val.accuracy;
      best_loss = val.loss;
      best = model.store.snapshot();
      run.best_epoch = epoch;
      since_best = 0;
    } else if (config.train.patience > 0 && ++since_best >= config.train.patience) {
      break;
    }
  }

  model.store.restore(best);
  run.test = evaluate(model, data, Partition::test, config.loss);
  return run;
}

TrainRun run_experiment(const RunConfig& config) {
  config.validate();
  const Dataset data = generate_dataset(config.data);
  Model model = Model::create(config.model, config.data, config.seed);
  return train(data, model, config);
}

GradCheckResult gradcheck_model(const RunConfig& config, double eps) {
  config.validate();
  DatasetConfig dc = config.data;
  dc.samples_per_class = 5;
  const Dataset data = generate_dataset(dc);
  Model model = Model::create(config.model, config.data, config.seed);
  const MultimodalSample& sample = data.samples.front();
  const LossBuilder f = [&](Tape& tape) {
    const ForwardResult out = forward(tape, model, sample);
    return sample_loss(out, model, sample.label, config.loss).total;
  };
  return finite_diff_check(f, model.store.all(), eps);
}

namespace {

constexpr char kMagic[8] = {'U', 'C', 'F', 'C', 'K', 'P', 'T', '1'};
static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Model& model, const RunConfig& config) {
  json header;
  header["config"] = to_json(config);
  header["parameters"] = json::array();
  for (const Parameter* p : model.store.all())
    header["parameters"].push_back({{"name", p->name}, {"shape", p->value.shape}});
  const std::string text = header.dump();
  const std::uint64_t len = text.size();

  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + file.string());
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter* p : model.store.all())
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
  if (!out) throw InputError("failed writing checkpoint " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint " + file.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw InputError(file.string() + " is not a checkpoint");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw InputError(file.string() + ": truncated header");
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(file.string() + ": malformed header: " + e.what());
  }

  Checkpoint ck{run_config_from_json(header.at("config")), Model{}};
  ck.model = Model::create(ck.config.model, ck.config.data, ck.config.seed);
  const json& params = header.at("parameters");
  auto all = ck.model.store.all();
  if (params.size() != all.size()) {
    throw InputError(file.string() + ": " + std::to_string(params.size()) + " parameters, model has " +
                     std::to_string(all.size()));
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    Parameter& p = *all[i];
    if (params[i].at("name").get<std::string>() != p.name || params[i].at("shape").get<Shape>() != p.value.shape) {
      throw InputError(file.string() + ": parameter " + std::to_string(i) + " does not match " + p.name + " " +
                       shape_str(p.value.shape));
    }
    in.read(reinterpret_cast<char*>(p.value.data.data()),
            static_cast<std::streamsize>(p.value.data.size() * sizeof(double)));
    if (!in) throw InputError(file.string() + ": truncated data at " + p.name);
  }
  return ck;
}

json to_json(const EvalResult& r) {
  return {{"count", r.count},
          {"loss", r.loss},
          {"accuracy", r.accuracy},
          {"similarity", r.similarity},
          {"confusion", r.confusion}};
}

json to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},       {"train_loss", m.train_loss},     {"train_accuracy", m.train_accuracy},
          {"val_loss", m.val_loss}, {"val_accuracy", m.val_accuracy}, {"val_similarity", m.val_similarity}};
}

std::string metrics_jsonl(const TrainRun& run) {
  std::ostringstream os;
  os << json{{"config", to_json(run.config)}, {"seed", run.config.seed}}.dump() << '\n';
  for (const auto& m : run.epochs) os << to_json(m).dump() << '\n';
  os << json{{"best_epoch", run.best_epoch}, {"test", to_json(run.test)}}.dump() << '\n';
  return os.str();
}

std::string confusion_csv(const TrainRun& run) {
  std::ostringstream os;
  os << "# seed=" << run.config.seed << " config=" << to_json(run.config).dump() << '\n';
  os << "true_class";
  const std::size_t k = run.test.confusion.size();
  for (std::size_t c = 0; c < k; ++c) os << ",pred_" << c;
  os << '\n';
  for (std::size_t r = 0; r < k; ++r) {
    os << r;
    for (std::size_t c = 0; c < k; ++c) os << ',' << run.test.confusion[r][c];
    os << '\n';
  }
  return os.str();
}

}  // namespace ucf
