// ucf: data generation, training, evaluation, profiling, gradient checks,
// ablations and the acceptance suite.
//
// Exit codes: 0 ok, 1 runtime failure, 2 config or usage error, 3 acceptance
// failure (and gradcheck above tolerance).
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ucf/acceptance.hpp"
#include "ucf/profiler.hpp"
#include "ucf/trainer.hpp"

namespace fs = std::filesystem;
using namespace ucf;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAcceptance = 3;

// Flags shared by every config-driven subcommand; set values override the file.
struct ConfigFlags {
  std::string file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<double> alpha;
  std::optional<std::string> variant;
  bool dump = false;

  void attach(CLI::App* app, bool required) {
    auto* opt = app->add_option("--config", file, "Run config JSON; missing keys keep their defaults");
    if (required) opt->required();
    app->add_option("--seed", seed, "Override seed and data.seed");
    app->add_option("--epochs", epochs, "Override train.epochs");
    app->add_option("--lr", learning_rate, "Override optimizer.learning_rate");
    app->add_option("--alpha", alpha, "Override loss.alpha");
    app->add_option("--variant", variant, "Override model.encoder_variant (sim, seq, full, none)");
    app->add_flag("--dump-config", dump, "Print the resolved config as JSON and exit");
  }

  RunConfig resolve() const {
    RunConfig c = file.empty() ? RunConfig{} : load_run_config(file);
    if (seed) {
      c.seed = *seed;
      c.data.seed = *seed;
    }
    if (epochs) c.train.epochs = *epochs;
    if (learning_rate) c.optimizer.learning_rate = *learning_rate;
    if (alpha) c.loss.alpha = *alpha;
    if (variant) c.model.encoder_variant = encoder_variant_from_string(*variant);
    c.validate();
    return c;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string config_comment(const RunConfig& c) {
  return "# seed=" + std::to_string(c.seed) + " config=" + to_json(c).dump() + "\n";
}

// Training data: the dataset directory when given, otherwise generated from the config.
Dataset load_or_generate(const std::string& dir, RunConfig& config) {
  if (dir.empty()) return generate_dataset(config.data);
  Dataset d = read_dataset(dir);
  config.data = d.config;
  return d;
}

int cmd_gen_data(const RunConfig& c, const std::string& out) {
  const Dataset d = generate_dataset(c.data);
  write_dataset(d, out);
  std::cout << "wrote " << d.samples.size() << " samples to " << out << "\n";
  return 0;
}

int cmd_train(RunConfig c, const std::string& data_dir, const std::string& out) {
  const Dataset data = load_or_generate(data_dir, c);
  Model model = Model::create(c.model, c.data, c.seed);
  const TrainRun run = train(data, model, c);
  const fs::path dir(out);
  fs::create_directories(dir);
  save_checkpoint(dir / "model.ckpt", model, c);
  write_file(dir / "metrics.jsonl", metrics_jsonl(run));
  write_file(dir / "confusion.csv", confusion_csv(run));
  std::cout << "epochs " << run.epochs.size() << ", best epoch " << run.best_epoch << ", test accuracy "
            << run.test.accuracy << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_dir, const std::string& split) {
  Checkpoint ck = load_checkpoint(checkpoint);
  const Dataset data = data_dir.empty() ? generate_dataset(ck.config.data) : read_dataset(data_dir);
  const EvalResult r = evaluate(ck.model, data, partition_from_string(split), ck.config.loss);
  nlohmann::json j = to_json(r);
  j["split"] = split;
  j["seed"] = ck.config.seed;
  j["config"] = to_json(ck.config);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_profile(const RunConfig& c, const std::string& layers, const std::string& format, const std::string& out) {
  std::uint64_t lo = 2, hi = 5;
  const auto dots = layers.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoull(layers);
    } else {
      lo = std::stoull(layers.substr(0, dots));
      hi = std::stoull(layers.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ConfigError("--layers: expected N or A..B, got '" + layers + "'");
  }
  if (lo == 0 || hi < lo) throw ConfigError("--layers: empty or zero range '" + layers + "'");
  const ProfileConfig pc = ProfileConfig::from(c.model.attention, c.data.n_modalities, c.data.n_steps);
  const auto rows = compare_complexity(pc, lo, hi);
  const CostReport f = profile_encoder(EncoderVariant::seq, pc);
  std::string text;
  if (format == "text") {
    text = config_comment(c) + complexity_text(pc, rows);
  } else {
    text = config_comment(c) + complexity_csv(rows) + "# factorized per-layer: core_params_delta=" +
           std::to_string(f.core_params_per_layer()) + " macs_delta=" + std::to_string(f.flops_per_layer()) + "\n";
  }
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return 0;
}

int cmd_gradcheck(const RunConfig& c, double eps) {
  const GradCheckResult r = gradcheck_model(c, eps);
  std::cout << "max_rel_error " << r.max_rel_error << " over " << r.coordinates << " coordinates (worst "
            << r.worst_parameter << "[" << r.worst_index << "] analytic " << r.worst_analytic << " numeric "
            << r.worst_numeric << ")\n";
  return r.max_rel_error < acceptance::kGradcheckTolerance ? 0 : kExitAcceptance;
}

int cmd_ablate(RunConfig base, const std::string& data_dir, std::size_t seeds, const std::string& out) {
  const Dataset fixed = load_or_generate(data_dir, base);
  struct Row {
    std::string group, name;
    RunConfig config;
  };
  std::vector<Row> rows;
  const std::size_t n = base.data.n_modalities;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    RunConfig c = base;
    c.model.active_modalities.assign(n, false);
    std::string name;
    for (std::size_t m = 0; m < n; ++m) {
      c.model.active_modalities[m] = (mask >> m) & 1U;
      name += c.model.active_modalities[m] ? '1' : '0';
    }
    if (!c.model.active_modalities[std::min(c.model.main_modality, n - 1)]) {
      c.model.main_modality = c.model.active_indices(n).front();
    }
    rows.push_back({"modalities", name, c});
  }
  const std::pair<const char*, std::pair<EncoderVariant, bool>> arms[] = {
      {"baseline", {EncoderVariant::none, false}},
      {"ftmt", {base.model.encoder_variant == EncoderVariant::none ? EncoderVariant::sim : base.model.encoder_variant, false}},
      {"mcanet", {EncoderVariant::none, true}},
      {"ftmt+mcanet", {base.model.encoder_variant == EncoderVariant::none ? EncoderVariant::sim : base.model.encoder_variant, true}}};
  for (const auto& [name, arm] : arms) {
    RunConfig c = base;
    c.model.encoder_variant = arm.first;
    c.model.enable_mcanet = arm.second;
    rows.push_back({"modules", name, c});
  }

  std::ostringstream csv;
  csv << config_comment(base);
  csv << "group,name,seed,test_accuracy,val_accuracy,test_similarity,epochs\n";
  for (const Row& row : rows) {
    for (std::size_t s = 0; s < seeds; ++s) {
      RunConfig c = row.config;
      c.seed = base.seed + s;
      // With a dataset directory every seed shares its samples; otherwise each seed draws its own.
      if (data_dir.empty()) c.data.seed = c.seed;
      const Dataset data = data_dir.empty() ? generate_dataset(c.data) : fixed;
      Model model = Model::create(c.model, c.data, c.seed);
      const TrainRun run = train(data, model, c);
      double sim = 0.0;
      for (double v : run.test.similarity) sim += v;
      if (!run.test.similarity.empty()) sim /= static_cast<double>(run.test.similarity.size());
      const double val = run.best_epoch ? run.epochs[run.best_epoch - 1].val_accuracy
                                        : evaluate(model, data, Partition::val, c.loss).accuracy;
      csv << row.group << ',' << row.name << ',' << c.seed << ',' << run.test.accuracy << ',' << val << ',' << sim
          << ',' << run.epochs.size() << '\n';
      std::cerr << row.group << " " << row.name << " seed " << c.seed << ": " << run.test.accuracy << "\n";
    }
  }
  if (out.empty()) std::cout << csv.str();
  else write_file(out, csv.str());
  return 0;
}

int cmd_accept(const std::vector<int>& ids, bool verbose) {
  acceptance::Options options;
  options.only = ids;
  if (verbose) options.progress = &std::cerr;
  bool ok = true;
  for (const auto& r : acceptance::run_all(options)) {
    std::cout << acceptance::format(r) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal action recognition on synthetic sensor data with factorized encoders and gated fusion"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  ConfigFlags gen_flags, train_flags, profile_flags, grad_flags, ablate_flags;
  std::string out_dir, data_dir, checkpoint, split = "test", layers = "2..5", format = "csv", out_file;
  double eps = 1e-5;
  std::size_t seeds = 1;
  std::vector<int> ids;
  bool verbose = false;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset directory");
  gen_flags.attach(gen, true);
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train and write model.ckpt, metrics.jsonl and confusion.csv");
  train_flags.attach(tr, true);
  tr->add_option("--data", data_dir, "Dataset directory; generated from the config when omitted");
  tr->add_option("--out", out_dir, "Output directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint; metrics JSON on stdout");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  ev->add_option("--data", data_dir, "Dataset directory; regenerated from the checkpoint config when omitted");
  ev->add_option("--split", split, "Partition: train, val or test");

  auto* prof = app.add_subcommand("profile", "Parameter and MAC counts per encoder variant and depth");
  profile_flags.attach(prof, false);
  prof->add_option("--layers", layers, "Layer count N or range A..B");
  prof->add_option("--format", format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  prof->add_option("--out", out_file, "Write here instead of stdout");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the total loss on one sample");
  grad_flags.attach(grad, true);
  grad->add_option("--eps", eps, "Central-difference step");

  auto* abl = app.add_subcommand("ablate", "Modality-mask and module-switch grid, CSV summary");
  ablate_flags.attach(abl, true);
  abl->add_option("--data", data_dir, "Dataset directory; generated per seed from the config when omitted");
  abl->add_option("--seeds", seeds, "Consecutive seeds per configuration, starting at the config seed");
  abl->add_option("--out", out_file, "Write here instead of stdout");

  auto* acc = app.add_subcommand("accept", "Run acceptance criteria 1-9; one PASS/FAIL line each");
  acc->add_option("ids", ids, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  acc->add_flag("-v,--verbose", verbose, "Progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  auto resolved = [](const ConfigFlags& f) -> std::optional<RunConfig> {
    RunConfig c = f.resolve();
    if (!f.dump) return c;
    std::cout << to_json(c).dump(2) << "\n";
    return std::nullopt;
  };

  try {
    if (*gen) {
      auto c = resolved(gen_flags);
      return c ? cmd_gen_data(*c, out_dir) : 0;
    }
    if (*tr) {
      auto c = resolved(train_flags);
      return c ? cmd_train(*c, data_dir, out_dir) : 0;
    }
    if (*ev) return cmd_eval(checkpoint, data_dir, split);
    if (*prof) {
      auto c = resolved(profile_flags);
      return c ? cmd_profile(*c, layers, format, out_file) : 0;
    }
    if (*grad) {
      auto c = resolved(grad_flags);
      return c ? cmd_gradcheck(*c, eps) : 0;
    }
    if (*abl) {
      auto c = resolved(ablate_flags);
      return c ? cmd_ablate(*c, data_dir, seeds, out_file) : 0;
    }
    if (*acc) return cmd_accept(ids, verbose);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
