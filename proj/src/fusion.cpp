#include "ucf/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace ucf {

ModalityRoles ModalityRoles::with_main(std::size_t modalities, std::size_t main) {
  ModalityRoles roles;
  roles.main = main;
  for (std::size_t n = 0; n < modalities; ++n)
    if (n != main) roles.subs.push_back(n);
  roles.validate(modalities);
  return roles;
}

void ModalityRoles::validate(std::size_t modalities) const {
  if (main >= modalities) {
    throw ConfigError("model.main_modality: index " + std::to_string(main) + " but only " +
                      std::to_string(modalities) + " modalities");
  }
  std::vector<bool> seen(modalities, false);
  seen[main] = true;
  for (std::size_t s : subs) {
    if (s >= modalities || seen[s]) {
      throw ConfigError("modality roles: sub index " + std::to_string(s) + " is out of range or repeated");
    }
    seen[s] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ConfigError("modality roles: main and subs do not cover every modality");
  }
}

Tensor FusionOutput::gate_values() const {
  if (gates.empty()) return Tensor({0, 0});
  const std::size_t steps = gates[0].value().size();
  Tensor out({gates.size(), steps});
  for (std::size_t i = 0; i < gates.size(); ++i)
    std::copy(gates[i].value().data.begin(), gates[i].value().data.end(), out.data.begin() + i * steps);
  return out;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_sim: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const double sa = kernels::dot(a, a);
  const double sb = kernels::dot(b, b);
  if (std::sqrt(sa) < 1e-12 || std::sqrt(sb) < 1e-12) return 0.0;
  return kernels::dot(a, b) / std::sqrt(sa * sb);
}

FusionOutput fuse(const EmbeddingGrid& c, const ModalityRoles& roles) {
  roles.validate(c.modalities);
  FusionOutput out;
  const Var main = c.modality(roles.main);
  Var acc = main;
  for (std::size_t n : roles.subs) {
    const Var sub = c.modality(n);
    const Var gate = ops::sigmoid(ops::row_cosine(main, sub));
    acc = ops::add(acc, ops::scale_rows(sub, gate));
    out.gates.push_back(gate);
  }
  out.c_agg = acc;
  return out;
}

ClassifierHead ClassifierHead::create(ParameterStore& store, const std::string& prefix, std::size_t in_dim,
                                      std::size_t hidden, std::size_t classes, Rng& rng) {
  ClassifierHead head;
  head.w1 = &store.add_weight(prefix + ".w1", in_dim, hidden, rng);
  head.b1 = &store.add_zeros(prefix + ".b1", {hidden});
  head.w2 = &store.add_weight(prefix + ".w2", hidden, classes, rng);
  head.b2 = &store.add_zeros(prefix + ".b2", {classes});
  return head;
}

Var classifier_logits(Var features, const ClassifierHead& head) {
  const std::size_t n = features.value().size();
  if (n != head.in_dim()) {
    throw ShapeError("classify: flattened input has " + std::to_string(n) + " values, head expects " +
                     std::to_string(head.in_dim()));
  }
  Tape& tape = features.tape();
  Var flat = ops::reshape(features, {1, n});
  Var h = ops::relu(ops::add_row(ops::matmul(flat, tape.parameter(*head.w1)), tape.parameter(*head.b1)));
  Var logits = ops::add_row(ops::matmul(h, tape.parameter(*head.w2)), tape.parameter(*head.b2));
  return ops::reshape(logits, {head.classes()});
}

Var classify(Var features, const ClassifierHead& head) {
  return ops::softmax(classifier_logits(features, head), 0);
}

}  // namespace ucf
