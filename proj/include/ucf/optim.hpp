#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ucf/autodiff.hpp"
#include "ucf/parameter.hpp"

namespace ucf {

struct OptimizerConfig {
  double learning_rate = 0.0005;
  double momentum = 0.9;
  // Global gradient-norm ceiling applied before the update; 0 disables.
  double clip_norm = 0.0;

  void validate() const;
};

// Euclidean norm of all gradients taken together.
double grad_norm(std::span<Parameter* const> params);

// g ← g·min(1, clip/‖g‖); v ← momentum·v + g; value ← value − lr·v; grads
// are zeroed afterwards.
// Every parameter must carry a gradient from a backward pass.
void sgd_step(std::span<Parameter* const> params, const OptimizerConfig& config);
void sgd_step(ParameterStore& store, const OptimizerConfig& config);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

// Builds the scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

// Central differences (f(θ+eps)−f(θ−eps))/(2·eps) per coordinate against tape
// gradients; error is |g_ad − g_fd| / max(1e-8, |g_ad| + |g_fd|).
GradCheckResult finite_diff_check(const LossBuilder& f, std::span<Parameter* const> params,
                                  double eps = 1e-5);

}  // namespace ucf
