#include "ucf/optim.hpp"

#include <algorithm>
#include <cmath>

namespace ucf {

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("optimizer.learning_rate must be a finite number >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer.momentum must lie in [0,1)");
  if (!(clip_norm >= 0.0) || !std::isfinite(clip_norm)) {
    throw ConfigError("optimizer.clip_norm must be a finite number >= 0");
  }
}

double grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad) sq += g * g;
  return std::sqrt(sq);
}

void sgd_step(std::span<Parameter* const> params, const OptimizerConfig& config) {
  for (const Parameter* p : params) {
    if (!p->has_grad) throw ContractError("sgd_step: parameter " + p->name + " has no gradient");
  }
  double factor = 1.0;
  if (config.clip_norm > 0.0) {
    const double norm = grad_norm(params);
    if (norm > config.clip_norm) factor = config.clip_norm / norm;
  }
  for (Parameter* p : params) {
    auto& v = p->velocity.data;
    auto& w = p->value.data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = config.momentum * v[i] + factor * p->grad[i];
      w[i] -= config.learning_rate * v[i];
    }
    p->zero_grad();
  }
}

void sgd_step(ParameterStore& store, const OptimizerConfig& config) {
  const auto params = store.all();
  sgd_step(params, config);
}

GradCheckResult finite_diff_check(const LossBuilder& f, std::span<Parameter* const> params,
                                  double eps) {
  if (!(eps > 0.0)) throw ContractError("finite_diff_check: eps must be positive");
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }

  auto evaluate = [&f]() {
    Tape tape;
    return f(tape).item();
  };

  GradCheckResult result;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value.data[i];
      p->value.data[i] = original + eps;
      const double up = evaluate();
      p->value.data[i] = original - eps;
      const double down = evaluate();
      p->value.data[i] = original;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double err =
          std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_rel_error || result.worst_parameter.empty()) {
        if (err >= result.max_rel_error) {
          result.max_rel_error = err;
          result.worst_parameter = p->name;
          result.worst_index = i;
          result.worst_analytic = analytic;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return result;
}

}  // namespace ucf
