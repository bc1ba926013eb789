#include "ucf/losses.hpp"

#include <algorithm>
#include <cmath>

namespace ucf {

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("loss.alpha must be a finite non-negative number");
  }
  if (!(clamp_eps > 0.0 && clamp_eps < 1.0)) throw ConfigError("loss.clamp_eps must lie in (0, 1)");
}

Var contrastive_loss(const EmbeddingGrid& c, const ModalityRoles& roles, const LossConfig& config) {
  roles.validate(c.modalities);
  Tape& tape = c.z.tape();
  Var loss = tape.constant(Tensor::scalar(0.0));
  if (roles.subs.empty()) return loss;
  const Var main = c.modality(roles.main);
  for (std::size_t n : roles.subs) {
    Var sim = ops::mean(ops::row_cosine(main, c.modality(n)));
    loss = ops::sub(loss, ops::log(ops::clamp(sim, config.clamp_eps, 1.0)));
  }
  return loss;
}

Var ce_loss(Var probs, std::size_t target) {
  const std::size_t classes = probs.value().size();
  if (target >= classes) {
    throw InputError("ce_loss: target " + std::to_string(target) + " outside " + std::to_string(classes) +
                     " classes");
  }
  return ops::neg(ops::log(ops::clamp(ops::pick(probs, target), kProbabilityFloor, 1.0)));
}

Var ce_loss_from_logits(Var logits, std::size_t target) {
  return ops::softmax_cross_entropy(logits, target, kProbabilityFloor);
}

Var total_loss(Var ce, Var contrast, const LossConfig& config) {
  return ops::add(ce, ops::scale(contrast, config.alpha));
}

double contrastive_from_similarity(double mean_similarity, double clamp_eps) {
  return -std::log(std::clamp(mean_similarity, clamp_eps, 1.0));
}

double ce_from_probability(double p_target) { return -std::log(std::max(p_target, kProbabilityFloor)); }

double total_loss(double ce, double contrast, const LossConfig& config) { return ce + config.alpha * contrast; }

}  // namespace ucf
