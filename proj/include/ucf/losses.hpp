#pragma once

#include <cstddef>

#include "ucf/fusion.hpp"

namespace ucf {

struct LossConfig {
  double alpha = 0.2;
  double clamp_eps = 1e-6;

  void validate() const;
};

// Probability floor inside the cross-entropy log.
inline constexpr double kProbabilityFloor = 1e-12;

// −Σ_sub log(clamp(mean_t cos(C_main[t], C_sub[t]), eps, 1)). Zero when there
// are no sub-modalities.
Var contrastive_loss(const EmbeddingGrid& c, const ModalityRoles& roles, const LossConfig& config);

// −log(max(O[target], 1e-12)). Throws InputError for target ≥ n_cls.
Var ce_loss(Var probs, std::size_t target);
// Same value computed from pre-softmax scores; its gradient stays
// O − onehot(target) even when O[target] is below the floor.
Var ce_loss_from_logits(Var logits, std::size_t target);

Var total_loss(Var ce, Var contrast, const LossConfig& config);

// Plain-number forms.
double contrastive_from_similarity(double mean_similarity, double clamp_eps = 1e-6);
double ce_from_probability(double p_target);
double total_loss(double ce, double contrast, const LossConfig& config);

}  // namespace ucf
