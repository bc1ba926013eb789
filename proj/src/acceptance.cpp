#include "ucf/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "ucf/profiler.hpp"

namespace ucf::acceptance {

RunConfig desk_config() {
  RunConfig c;
  c.model.attention = {.d = 32, .heads = 4, .d_k = 8, .d_v = 8, .layers = 2};
  c.model.feature_dims = {16, 16, 16};
  c.optimizer.learning_rate = 0.0005;
  c.optimizer.clip_norm = 1.0;
  c.train.epochs = 200;
  c.train.patience = 30;
  return c;
}

const TrainRun& RunCache::get(const RunConfig& config) {
  const std::string key = to_json(config).dump();
  auto it = runs_.find(key);
  if (it == runs_.end()) it = runs_.emplace(key, run_experiment(config)).first;
  return it->second;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed check; the first message leads the detail line.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (!pass) detail << "; ";
    else detail.str("");
    pass = false;
    detail << what;
  }
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunConfig with_seed(RunConfig c, std::uint64_t seed) {
  c.seed = seed;
  c.data.seed = seed;
  return c;
}

double mean_similarity(const EvalResult& r) {
  if (r.similarity.empty()) return 0.0;
  double s = 0.0;
  for (double v : r.similarity) s += v;
  return s / static_cast<double>(r.similarity.size());
}

Tensor uniform(Shape shape, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = u(rng);
  return t;
}

// Per-layer factorized core: attention projections and feed-forward maps of
// both sublayers of one built layer, counted weight by weight.
std::uint64_t enumerated_core_params(const AttentionConfig& cfg) {
  ParameterStore store;
  Rng rng(0);
  AttentionConfig one = cfg;
  one.layers = 1;
  FtmtSeqEncoder::create(store, "ftmt", one, rng);
  std::uint64_t n = 0;
  for (const Parameter* p : std::as_const(store).all())
    if (p->name.find(".norm") == std::string::npos) n += p->value.size();
  return n;
}

// MACs of the Q/K/V/O matmuls recorded on a tape by one modality and one
// temporal attention pass over an N×T grid.
std::uint64_t tape_projection_macs(const AttentionConfig& cfg, std::size_t n, std::size_t t) {
  ParameterStore store;
  Rng rng(1);
  const auto modality = AttentionWeights::create(store, "m", cfg, rng);
  const auto temporal = AttentionWeights::create(store, "t", cfg, rng);
  Tape tape;
  Var z = tape.constant(uniform({n * t, cfg.d}, rng, -1, 1));
  const std::size_t first = tape.size();
  attend(z, modality, modality_token_groups(n, t));
  attend(z, temporal, temporal_token_groups(n, t));
  std::uint64_t macs = 0;
  for (std::size_t id = first; id < tape.size(); ++id) {
    if (tape.op_name(id) != "matmul") continue;
    const auto in = tape.inputs_of(id);
    const Shape& a = tape.value(in[0]).shape;
    const Shape& b = tape.value(in[1]).shape;
    macs += a[0] * a[1] * b[1];
  }
  return macs;
}

CriterionResult parameter_delta() {
  Outcome o;
  const ProfileConfig pc;
  const std::uint64_t counted = profile_encoder(EncoderVariant::seq, pc).core_params_per_layer();
  const std::uint64_t sim = profile_encoder(EncoderVariant::sim, pc).core_params_per_layer();
  const std::uint64_t built = enumerated_core_params({});
  const double rel = std::abs(counted / 1e6 - kReferenceParamDeltaMillions) / kReferenceParamDeltaMillions;
  o.require(counted == 3'145'728, "profiler core delta " + std::to_string(counted) + " != 3145728");
  o.require(sim == counted, "sim and seq core deltas differ");
  o.require(built == counted, "enumerated weights " + std::to_string(built) + " != profiler " + std::to_string(counted));
  o.require(rel <= kReferenceTolerance, "relative gap " + fixed(rel, 4) + " to 3.15M exceeds 1%");
  if (o.pass)
    o.detail << "core delta " << counted << " (enumerated " << built << "), " << fixed(100 * rel, 3)
             << "% from 3.15M";
  return {1, "Parameter-delta reproduction", o.pass, o.detail.str()};
}

CriterionResult flop_delta() {
  Outcome o;
  const ProfileConfig pc;
  const std::uint64_t counted = profile_encoder(EncoderVariant::sim, pc).flops_per_layer();
  const std::uint64_t taped = tape_projection_macs({}, pc.modalities, pc.steps);
  const double rel = std::abs(counted / 1e6 - kReferenceFlopDeltaMillions) / kReferenceFlopDeltaMillions;
  o.require(counted == 50'331'648, "profiler MAC delta " + std::to_string(counted) + " != 50331648");
  o.require(taped == counted, "tape-counted projection MACs " + std::to_string(taped) + " != profiler");
  o.require(rel <= kReferenceTolerance, "relative gap " + fixed(rel, 4) + " to 50.36M exceeds 1%");
  if (o.pass)
    o.detail << "MAC delta " << counted << " (tape " << taped << "), " << fixed(100 * rel, 3) << "% from 50.36M";
  return {2, "FLOP-delta reproduction", o.pass, o.detail.str()};
}

std::uint64_t pair_count(const TokenGroups& groups) {
  std::uint64_t n = 0;
  for (const auto& g : groups) n += g.size() * g.size();
  return n;
}

CriterionResult asymptotic_separation() {
  Outcome o;
  std::size_t cases = 0;
  for (std::uint64_t n : {2, 4, 8, 16}) {
    for (std::uint64_t t : {2, 4, 8, 16}) {
      const ProfileConfig pc{.modalities = n, .steps = t};
      const std::uint64_t full = count_macs_per_layer(EncoderVariant::full, pc).attention_scores;
      const std::uint64_t fact = count_macs_per_layer(EncoderVariant::sim, pc).attention_scores;
      const std::uint64_t num = (n * t) * (n * t), den = n * n * t + n * t * t;
      const std::string at = "(N=" + std::to_string(n) + ",T=" + std::to_string(t) + ")";
      o.require(full * den == fact * num, "ratio mismatch at " + at);
      o.require(pair_count(joint_token_groups(n, t)) == num, "joint pair count mismatch at " + at);
      o.require(pair_count(modality_token_groups(n, t)) + pair_count(temporal_token_groups(n, t)) == den,
                "factorized pair count mismatch at " + at);
      ++cases;
    }
  }
  const ProfileConfig big{.modalities = 16, .steps = 16};
  const std::uint64_t full = count_macs_per_layer(EncoderVariant::full, big).attention_scores;
  const std::uint64_t fact = count_macs_per_layer(EncoderVariant::sim, big).attention_scores;
  o.require(full == 8 * fact, "N=T=16 ratio is not 8");
  if (o.pass) o.detail << cases << " grid points exact, ratio " << full / fact << " at N=T=16";
  return {3, "Asymptotic separation", o.pass, o.detail.str()};
}

RunConfig gradcheck_config(EncoderVariant v) {
  RunConfig c;
  c.data.n_steps = 4;
  c.data.n_classes = 4;
  c.data.samples_per_class = 5;
  c.model.attention = {.d = 16, .heads = 2, .d_k = 8, .d_v = 8, .layers = 2};
  c.model.feature_dims = {8, 8, 8};
  c.model.encoder_variant = v;
  c.loss.alpha = 0.2;
  return c;
}

CriterionResult gradient_correctness() {
  Outcome o;
  std::ostringstream parts;
  for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq}) {
    const GradCheckResult r = gradcheck_model(gradcheck_config(v));
    o.require(r.max_rel_error < kGradcheckTolerance,
              to_string(v) + " max rel error " + std::to_string(r.max_rel_error) + " at " + r.worst_parameter);
    parts << to_string(v) << " " << std::scientific << std::setprecision(2) << r.max_rel_error << " over "
          << r.coordinates << " coords; ";
  }
  if (o.pass) o.detail << parts.str() << "tolerance 1e-4";
  return {4, "Gradient correctness", o.pass, o.detail.str()};
}

std::string mask_name(const std::vector<bool>& m) {
  std::string s;
  for (bool b : m) s += b ? '1' : '0';
  return s;
}

CriterionResult fusion_benefit(RunCache& cache, std::ostream* progress) {
  Outcome o;
  const std::vector<std::vector<bool>> masks{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0},
                                             {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  std::map<std::string, std::vector<double>> acc;
  std::vector<double> best_single(kSeeds, 0.0);
  for (const auto& m : masks) {
    for (std::size_t s = 0; s < kSeeds; ++s) {
      RunConfig c = with_seed(desk_config(), s);
      c.model.active_modalities = m;
      const double a = cache.get(c).test.accuracy;
      acc[mask_name(m)].push_back(a);
      if (std::count(m.begin(), m.end(), true) == 1) best_single[s] = std::max(best_single[s], a);
    }
    if (progress) *progress << "  [5] mask " << mask_name(m) << " median " << fixed(median(acc[mask_name(m)]), 3) << "\n";
  }
  const double all = median(acc["111"]);
  const double single = median(best_single);
  o.require(all >= single + kFusionMarginPoints,
            "3-modality median " + fixed(all, 3) + " < best single median " + fixed(single, 3) + " + 0.10");
  for (const auto& m : masks) {
    if (std::count(m.begin(), m.end(), true) < 2) continue;
    for (std::size_t n = 0; n < 3; ++n) {
      if (!m[n]) continue;
      std::vector<bool> u(3, false);
      u[n] = true;
      const double mm = median(acc[mask_name(m)]), mu = median(acc[mask_name(u)]);
      o.require(mm > mu, mask_name(m) + " median " + fixed(mm, 3) + " does not beat " + mask_name(u) + " " +
                             fixed(mu, 3));
    }
  }
  std::ostringstream medians;
  for (const auto& m : masks) medians << mask_name(m) << "=" << fixed(median(acc[mask_name(m)]), 3) << " ";
  if (o.pass) o.detail << "3-modality " << fixed(all, 3) << " vs best single " << fixed(single, 3) << "; ";
  else o.detail << " | ";
  o.detail << "medians " << medians.str();
  return {5, "Fusion-benefit property", o.pass, o.detail.str()};
}

CriterionResult module_ablation(RunCache& cache, std::ostream* progress) {
  Outcome o;
  struct Arm {
    const char* name;
    EncoderVariant variant;
    bool mcanet;
  };
  const Arm arms[] = {{"baseline", EncoderVariant::none, false},
                      {"ftmt", EncoderVariant::sim, false},
                      {"mcanet", EncoderVariant::none, true},
                      {"full", EncoderVariant::sim, true}};
  std::map<std::string, double> med;
  for (const Arm& arm : arms) {
    std::vector<double> acc;
    for (std::size_t s = 0; s < kSeeds; ++s) {
      RunConfig c = with_seed(desk_config(), s);
      c.model.encoder_variant = arm.variant;
      c.model.enable_mcanet = arm.mcanet;
      acc.push_back(cache.get(c).test.accuracy);
    }
    med[arm.name] = median(acc);
    if (progress) *progress << "  [6] " << arm.name << " median " << fixed(med[arm.name], 3) << "\n";
  }
  const double b = med["baseline"], f = med["ftmt"], m = med["mcanet"], full = med["full"];
  o.require(b <= f, "baseline " + fixed(b, 3) + " > ftmt-only " + fixed(f, 3));
  o.require(b <= m, "baseline " + fixed(b, 3) + " > mcanet-only " + fixed(m, 3));
  o.require(f < full, "full " + fixed(full, 3) + " not strictly above ftmt-only " + fixed(f, 3));
  o.require(m < full, "full " + fixed(full, 3) + " not strictly above mcanet-only " + fixed(m, 3));
  o.require(b < full, "full " + fixed(full, 3) + " not strictly above baseline " + fixed(b, 3));
  if (!o.pass) o.detail << " | ";
  o.detail << "medians baseline=" << fixed(b, 3) << " ftmt=" << fixed(f, 3) << " mcanet=" << fixed(m, 3)
           << " full=" << fixed(full, 3);
  return {6, "Module-ablation property", o.pass, o.detail.str()};
}

bool identical_features_give_zero_contrast() {
  Rng rng(3);
  for (std::size_t steps : {1, 4, 8}) {
    const Tensor m = uniform({steps, 16}, rng, -2, 2);
    Tensor z({3 * steps, 16});
    for (std::size_t n = 0; n < 3; ++n)
      std::copy(m.data.begin(), m.data.end(), z.data.begin() + static_cast<std::ptrdiff_t>(n * m.size()));
    Tape tape;
    if (contrastive_loss({tape.constant(z), 3, steps, 16}, ModalityRoles::with_main(3), {}).item() != 0.0)
      return false;
  }
  return true;
}

CriterionResult contrastive_alignment(RunCache& cache, std::ostream* progress) {
  Outcome o;
  std::ostringstream pairs;
  std::size_t wins = 0;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    RunConfig with = with_seed(desk_config(), s);
    with.loss.alpha = 0.2;
    RunConfig without = with;
    without.loss.alpha = 0.0;
    const double a = mean_similarity(cache.get(with).test);
    const double b = mean_similarity(cache.get(without).test);
    wins += a > b;
    o.require(a > b, "seed " + std::to_string(s) + ": alpha 0.2 similarity " + fixed(a, 3) + " <= alpha 0 " +
                         fixed(b, 3));
    pairs << fixed(a, 3) << "/" << fixed(b, 3) << " ";
    if (progress) *progress << "  [7] seed " << s << " similarity " << fixed(a, 3) << " vs " << fixed(b, 3) << "\n";
  }
  o.require(identical_features_give_zero_contrast(), "contrastive loss of identical features is not exactly 0");
  if (!o.pass) o.detail << " | ";
  o.detail << wins << "/" << kSeeds << " seeds higher with alpha 0.2 (0.2/0 pairs " << pairs.str()
           << "), identical features give 0";
  return {7, "Contrastive-alignment property", o.pass, o.detail.str()};
}

Tensor permute_blocks(const Tensor& z, const std::vector<std::size_t>& perm, std::size_t steps) {
  Tensor out(z.shape);
  const std::size_t d = z.cols();
  for (std::size_t m = 0; m < perm.size(); ++m)
    for (std::size_t t = 0; t < steps; ++t)
      std::copy_n(z.data.begin() + static_cast<std::ptrdiff_t>((perm[m] * steps + t) * d), d,
                  out.data.begin() + static_cast<std::ptrdiff_t>((m * steps + t) * d));
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

CriterionResult invariants() {
  Outcome o;
  std::size_t checks = 0;

  // Softmax rows.
  double worst_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    Tape tape;
    const Tensor y = ops::softmax(tape.constant(uniform({7, 11}, rng, -50, 50)), 1).value();
    for (std::size_t r = 0; r < 7; ++r) {
      double s = 0.0;
      for (double v : y.row(r)) s += v;
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
  }
  o.require(worst_sum <= kSoftmaxSumTolerance, "softmax row sum off by " + std::to_string(worst_sum));
  ++checks;

  // Gate band over trained-size random models on real samples.
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    RunConfig c = with_seed(desk_config(), seed);
    c.data.samples_per_class = 4;
    const Dataset data = generate_dataset(c.data);
    const Model model = Model::create(c.model, c.data, seed);
    for (const auto& s : data.samples) {
      Tape tape;
      const Tensor g = forward(tape, model, s).fusion->gate_values();
      for (double v : g.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    Tape tape;
    const Tensor g = fuse({tape.constant(uniform({3 * 6, 8}, rng, -5, 5)), 3, 6, 8}, ModalityRoles::with_main(3))
                         .gate_values();
    for (double v : g.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  o.require(lo >= kGateLowerBound && hi <= kGateUpperBound,
            "gates span [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  ++checks;

  // Gate scale invariance: scaling a sub-modality slice by a power of two.
  {
    Rng rng(5);
    const Tensor z = uniform({3 * 8, 16}, rng, -1, 1);
    Tensor scaled = z;
    for (std::size_t i = 8 * 16; i < scaled.size(); ++i) scaled.data[i] *= 0.125;
    for (std::size_t i = 0; i < 8 * 16; ++i) scaled.data[i] *= 16.0;
    Tape tape;
    const auto roles = ModalityRoles::with_main(3);
    o.require(fuse({tape.constant(z), 3, 8, 16}, roles).gate_values() ==
                  fuse({tape.constant(scaled), 3, 8, 16}, roles).gate_values(),
              "gates change under rescaling");
    ++checks;
  }

  // Permutation equivariance of modality attention and factorized encoders.
  {
    Rng rng(7);
    const AttentionConfig cfg{.d = 16, .heads = 4, .d_k = 4, .d_v = 4, .layers = 2};
    const std::size_t n = 3, t = 5;
    const Tensor z = uniform({n * t, cfg.d}, rng, -2, 2);
    const auto table = PositionalTable::build(t, cfg.d);
    for (const auto& perm : std::vector<std::vector<std::size_t>>{{1, 0, 2}, {2, 0, 1}, {0, 2, 1}}) {
      ParameterStore store;
      const auto w = AttentionWeights::create(store, "att", cfg, rng);
      Tape tape;
      const Tensor y = modality_attention({tape.constant(z), n, t, cfg.d}, w).z.value();
      const Tensor yp = modality_attention({tape.constant(permute_blocks(z, perm, t)), n, t, cfg.d}, w).z.value();
      o.require(yp == permute_blocks(y, perm, t), "modality attention is not permutation equivariant");
      for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full}) {
        const Encoder enc = make_encoder(v, store, "enc_" + to_string(v), cfg, rng);
        const Tensor e = encode({tape.constant(z), n, t, cfg.d}, enc, table).z.value();
        const Tensor ep = encode({tape.constant(permute_blocks(z, perm, t)), n, t, cfg.d}, enc, table).z.value();
        o.require(ep == permute_blocks(e, perm, t), to_string(v) + " encoder is not permutation equivariant");
      }
    }
    ++checks;
  }

  // Determinism: two identical short runs produce byte-identical artifacts.
  {
    RunConfig c = with_seed(desk_config(), 11);
    c.data.samples_per_class = 8;
    c.train.epochs = 3;
    const auto dir = std::filesystem::temp_directory_path() / "ucf_accept_determinism";
    std::filesystem::create_directories(dir);
    std::string bytes[2];
    for (int k = 0; k < 2; ++k) {
      const Dataset data = generate_dataset(c.data);
      Model model = Model::create(c.model, c.data, c.seed);
      const TrainRun run = train(data, model, c);
      save_checkpoint(dir / "model.ckpt", model, c);
      bytes[k] = metrics_jsonl(run) + confusion_csv(run) + slurp(dir / "model.ckpt");
    }
    std::filesystem::remove_all(dir);
    o.require(!bytes[0].empty() && bytes[0] == bytes[1], "repeated run is not byte-identical");
    ++checks;
  }

  // Zero weights in every encoder leave only the global skip.
  {
    Rng rng(9);
    const AttentionConfig cfg{.d = 16, .heads = 2, .d_k = 8, .d_v = 8, .layers = 2};
    const Tensor z = uniform({3 * 4, cfg.d}, rng, -1, 1);
    const auto table = PositionalTable::build(4, cfg.d);
    for (EncoderVariant v : {EncoderVariant::sim, EncoderVariant::seq, EncoderVariant::full}) {
      ParameterStore store;
      const Encoder enc = make_encoder(v, store, "enc", cfg, rng);
      for (Parameter* p : store.all()) std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
      Tape tape;
      o.require(encode({tape.constant(z), 3, 4, cfg.d}, enc, table).z.value() == z,
                to_string(v) + " encoder with zero weights is not the identity");
    }
    ++checks;
  }

  if (o.pass)
    o.detail << checks << " invariant groups hold; max softmax row error " << std::scientific << std::setprecision(1)
             << worst_sum << ", gates in [" << std::fixed << std::setprecision(4) << lo << ", " << hi << "]";
  return {8, "Invariant suite", o.pass, o.detail.str()};
}

CriterionResult loss_oracles() {
  Outcome o;
  // Sub rows at 60 degrees from main rows: every per-step cosine is 1/2.
  const std::size_t steps = 6;
  Tensor z({2 * steps, 2});
  for (std::size_t t = 0; t < steps; ++t) {
    const double angle = 0.3 * static_cast<double>(t);
    z(t, 0) = std::cos(angle);
    z(t, 1) = std::sin(angle);
    z(steps + t, 0) = 2.0 * std::cos(angle + M_PI / 3.0);
    z(steps + t, 1) = 2.0 * std::sin(angle + M_PI / 3.0);
  }
  Tape tape;
  const double contrast = contrastive_loss({tape.constant(z), 2, steps, 2}, ModalityRoles::with_main(2), {}).item();
  o.require(std::abs(contrast - kLog2) <= kLossOracleTolerance, "contrastive loss " + std::to_string(contrast));
  o.require(std::abs(contrastive_from_similarity(0.5) - kLog2) <= kLossOracleTolerance,
            "contrastive_from_similarity(0.5)");

  const double ce = ce_loss(tape.constant(Tensor::vector({0.25, 0.25, 0.25, 0.25})), 1).item();
  const double ce_logits = ce_loss_from_logits(tape.constant(Tensor::vector({3.0, 3.0, 3.0, 3.0})), 0).item();
  o.require(std::abs(ce - kLog4) <= kLossOracleTolerance, "uniform cross entropy " + std::to_string(ce));
  o.require(std::abs(ce_logits - kLog4) <= kLossOracleTolerance, "uniform logit cross entropy");

  const LossConfig cfg{.alpha = 0.2};
  struct Hand {
    double ce, contrast, total;
  };
  for (const Hand& h : {Hand{1.0, 0.5, 1.1}, Hand{0.0, 2.0, 0.4}, Hand{kLog4, kLog2, kLog4 + 0.2 * kLog2}}) {
    const double plain = total_loss(h.ce, h.contrast, cfg);
    const double taped =
        total_loss(tape.constant(Tensor::scalar(h.ce)), tape.constant(Tensor::scalar(h.contrast)), cfg).item();
    o.require(std::abs(plain - h.total) <= kLossOracleTolerance && std::abs(taped - h.total) <= kLossOracleTolerance,
              "total loss for ce=" + std::to_string(h.ce) + " contrast=" + std::to_string(h.contrast));
  }
  if (o.pass)
    o.detail << "contrast " << fixed(contrast, 10) << ", ce " << fixed(ce, 10) << ", total = ce + 0.2*contrast on 3 hand cases";
  return {9, "Loss oracles", o.pass, o.detail.str()};
}

}  // namespace

CriterionResult run_criterion(int id, RunCache& cache, std::ostream* progress) {
  const auto start = Clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = parameter_delta(); break;
    case 2: r = flop_delta(); break;
    case 3: r = asymptotic_separation(); break;
    case 4: r = gradient_correctness(); break;
    case 5: r = fusion_benefit(cache, progress); break;
    case 6: r = module_ablation(cache, progress); break;
    case 7: r = contrastive_alignment(cache, progress); break;
    case 8: r = invariants(); break;
    case 9: r = loss_oracles(); break;
    default: throw ContractError("acceptance: no criterion " + std::to_string(id));
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.seconds > kBudgetSeconds[id]) {
    r.pass = false;
    r.detail += "; runtime " + fixed(r.seconds, 1) + " s over budget " + fixed(kBudgetSeconds[id], 0) + " s";
  }
  return r;
}

std::vector<CriterionResult> run_all(const Options& options) {
  RunCache cache;
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 9; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    out.push_back(run_criterion(id, cache, options.progress));
    if (options.progress) *options.progress << format(out.back()) << "\n" << std::flush;
  }
  return out;
}

std::string format(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS " : "FAIL ") << r.id << " " << r.title << " (" << fixed(r.seconds, 2) << " s): " << r.detail;
  return os.str();
}

}  // namespace ucf::acceptance
