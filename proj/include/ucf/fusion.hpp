#pragma once

#include <span>
#include <string>
#include <vector>

#include "ucf/embedding.hpp"

namespace ucf {

struct ModalityRoles {
  std::size_t main = 0;
  std::vector<std::size_t> subs;

  // main plus every other index in [0, modalities) in ascending order.
  static ModalityRoles with_main(std::size_t modalities, std::size_t main = 0);
  void validate(std::size_t modalities) const;
};

struct FusionOutput {
  Var c_agg;                 // T×d
  std::vector<Var> gates;    // one [T] vector per sub-modality, in roles.subs order

  // (N−1)×T gate values.
  Tensor gate_values() const;
};

// aᵀb / (‖a‖‖b‖), or 0 when either norm is below 1e-12.
double cosine_sim(std::span<const double> a, std::span<const double> b);

// C_agg[t] = C_main[t] + Σ_sub sigmoid(cos(C_main[t], C_sub[t]))·C_sub[t]
FusionOutput fuse(const EmbeddingGrid& c, const ModalityRoles& roles);

// flatten → linear(in, hidden) → relu → linear(hidden, n_cls) → softmax
struct ClassifierHead {
  Parameter* w1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* w2 = nullptr;
  Parameter* b2 = nullptr;

  static ClassifierHead create(ParameterStore& store, const std::string& prefix, std::size_t in_dim,
                               std::size_t hidden, std::size_t classes, Rng& rng);
  std::size_t in_dim() const { return w1->value.shape[0]; }
  std::size_t classes() const { return w2->value.shape[1]; }
};

// Pre-softmax scores [n_cls] for any input whose element count equals in_dim.
Var classifier_logits(Var features, const ClassifierHead& head);
// Class probabilities O [n_cls].
Var classify(Var features, const ClassifierHead& head);

}  // namespace ucf
