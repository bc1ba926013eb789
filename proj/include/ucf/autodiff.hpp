#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ucf/parameter.hpp"
#include "ucf/tensor.hpp"

namespace ucf {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  // Value of a single-element tensor.
  double item() const;
  // Gradient of the last backward() pass with respect to this value.
  std::span<const double> grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Append-only record of a computation. Every node stores the closure that
// produced its value so the tape can be replayed and checked bit-for-bit.
class Tape {
 public:
  using ForwardFn = std::function<Tensor(const Tape&)>;
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf that receives gradients but is not bound to a Parameter.
  Var variable(Tensor value);
  // Leaf bound to a Parameter; backward() accumulates into p.grad. Binding
  // the same parameter twice returns the same node.
  Var parameter(Parameter& p);

  // Populates gradients for every node reachable from `loss` (a
  // single-element tensor) and accumulates into bound Parameters.
  void backward(Var loss);

  // Recomputes every non-leaf node from its inputs. Returns true iff every
  // recomputed value is bit-identical to the recorded one.
  bool replay_matches() const;

  std::size_t size() const { return nodes_.size(); }
  std::string_view op_name(std::size_t id) const { return nodes_[id].op; }
  std::span<const std::size_t> inputs_of(std::size_t id) const { return nodes_[id].inputs; }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::span<const double> grad(std::size_t id) const;
  // Zero-initialized gradient buffer for accumulation during backward.
  std::vector<double>& grad_buffer(std::size_t id);

  Var record(const char* op, std::vector<Var> inputs, ForwardFn forward, BackwardFn backward);

 private:
  struct Node {
    const char* op = "";
    Tensor value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    ForwardFn forward;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  Var leaf(const char* op, Tensor value, bool requires_grad, Parameter* param);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
};

// Groups of token rows that attend to each other. Rows not listed in any
// group produce zero output.
using TokenGroups = std::vector<std::vector<std::size_t>>;

namespace ops {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var relu(Var a);
Var sigmoid(Var a);
// Throws DomainError on any non-positive input.
Var log(Var a);
Var softmax(Var a, std::size_t axis);
// −log(max(softmax(logits)[target], floor)) for a logit vector. The gradient
// is softmax(logits) − onehot(target) everywhere, including below the floor.
Var softmax_cross_entropy(Var logits, std::size_t target, double floor);
// Normalizes over the last axis: (x-mean)/sqrt(var+eps)*gain + bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
Var sum(Var a);
Var mean(Var a);
Var reshape(Var a, Shape shape);
// a[m×n] + b[n] broadcast over rows.
Var add_row(Var a, Var b);
// a[m×n] scaled per row by s[m].
Var scale_rows(Var a, Var s);
Var concat_cols(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var a, std::vector<std::size_t> rows);
// Cosine similarity of corresponding rows → [m]. Rows with norm < 1e-12
// give 0 with zero gradient.
Var row_cosine(Var a, Var b);
// Values outside [lo, hi] are clamped and pass no gradient.
Var clamp(Var a, double lo, double hi);
// Single element at flat index, as a [1] tensor.
Var pick(Var a, std::size_t index);

// Multi-head attention core. q,k: [m × heads·dk], v: [m × heads·dv].
// For every group and head: softmax(q·kᵀ/sqrt(dk))·v over the group's rows.
Var grouped_attention(Var q, Var k, Var v, TokenGroups groups, std::size_t heads);

}  // namespace ops

// Attention probabilities for one group and head, [g × g] row-major; the
// kernel used by ops::grouped_attention.
std::vector<double> attention_probs(const Tensor& q, const Tensor& k,
                                    std::span<const std::size_t> group, std::size_t head,
                                    std::size_t heads);

}  // namespace ucf
