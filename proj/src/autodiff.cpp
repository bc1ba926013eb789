#include "ucf/autodiff.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <numeric>

namespace ucf {

const Tensor& Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const auto& v = value();
  if (v.size() != 1) throw ContractError("item() on tensor of shape " + shape_str(v.shape));
  return v.data[0];
}

std::span<const double> Var::grad() const { return tape_->grad(id_); }

Var Tape::leaf(const char* op, Tensor value, bool requires_grad, Parameter* param) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.param = param;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return leaf("constant", std::move(value), false, nullptr); }

Var Tape::variable(Tensor value) { return leaf("variable", std::move(value), true, nullptr); }

Var Tape::parameter(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Var v = leaf("parameter", p.value, true, &p);
  bound_.emplace(&p, v.id());
  return v;
}

Var Tape::record(const char* op, std::vector<Var> inputs, ForwardFn forward, BackwardFn backward) {
  Node n;
  n.op = op;
  n.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (&in.tape() != this) throw ContractError(std::string(op) + ": input recorded on another tape");
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  n.value = forward(*this);
  n.forward = std::move(forward);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

std::span<const double> Tape::grad(std::size_t id) const { return nodes_[id].grad; }

std::vector<double>& Tape::grad_buffer(std::size_t id) {
  auto& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss recorded on another tape");
  const std::size_t root = loss.id();
  if (nodes_[root].value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_str(nodes_[root].value.shape));
  }
  std::vector<char> reachable(root + 1, 0);
  reachable[root] = 1;
  for (std::size_t id = root + 1; id-- > 0;) {
    if (!reachable[id]) continue;
    for (auto in : nodes_[id].inputs) reachable[in] = 1;
  }
  for (auto& n : nodes_) n.grad.clear();
  grad_buffer(root)[0] = 1.0;

  for (std::size_t id = root + 1; id-- > 0;) {
    if (!reachable[id] || !nodes_[id].requires_grad) continue;
    auto& node = nodes_[id];
    if (node.param != nullptr) {
      node.param->has_grad = true;
      if (!node.grad.empty()) {
        auto& pg = node.param->grad;
        for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += node.grad[i];
      }
      continue;
    }
    if (node.grad.empty() || !node.backward) continue;
    node.backward(*this, id);
  }
}

bool Tape::replay_matches() const {
  for (const auto& n : nodes_) {
    if (!n.forward) continue;
    Tensor again = n.forward(*this);
    if (again.shape != n.value.shape) return false;
    for (std::size_t i = 0; i < again.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(again.data[i]) != std::bit_cast<std::uint64_t>(n.value.data[i])) {
        return false;
      }
    }
  }
  return true;
}

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
  }
}

void require_matrix(const char* op, const Tensor& a) {
  if (a.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_str(a.shape));
}

template <class F>
Var unary(const char* op, Var a, F f, std::function<double(double x, double y)> dfdx) {
  const std::size_t ia = a.id();
  auto fwd = [ia, f](const Tape& t) {
    Tensor out = t.value(ia);
    for (auto& v : out.data) v = f(v);
    return out;
  };
  auto bwd = [ia, dfdx](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const auto g = t.grad(self);
    const auto& x = t.value(ia).data;
    const auto& y = t.value(self).data;
    auto& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfdx(x[i], y[i]);
  };
  return a.tape().record(op, {a}, fwd, bwd);
}

void accumulate(Tape& t, std::size_t id, std::span<const double> g, double factor = 1.0) {
  if (!t.requires_grad(id)) return;
  auto& buf = t.grad_buffer(id);
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += factor * g[i];
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> attention_probs(const Tensor& q, const Tensor& k,
                                    std::span<const std::size_t> group, std::size_t head,
                                    std::size_t heads) {
  const std::size_t dk = q.cols() / heads;
  const std::size_t g = group.size();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<double> p(g * g);
  for (std::size_t i = 0; i < g; ++i) {
    const double* qi = q.data.data() + group[i] * q.cols() + head * dk;
    for (std::size_t j = 0; j < g; ++j) {
      const double* kj = k.data.data() + group[j] * k.cols() + head * dk;
      double s = 0.0;
      for (std::size_t c = 0; c < dk; ++c) s += qi[c] * kj[c];
      p[i * g + j] = s * inv_sqrt;
    }
    kernels::softmax_row(std::span<double>(p.data() + i * g, g));
  }
  return p;
}

namespace ops {

Var matmul(Var a, Var b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.shape[1] != bv.shape[0]) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(av.shape) + " and " +
                     shape_str(bv.shape));
  }
  const std::size_t ia = a.id(), ib = b.id();
  const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
  auto fwd = [=](const Tape& t) {
    Tensor out({m, n});
    kernels::matmul(t.value(ia).data, t.value(ib).data, out.data, m, k, n);
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.requires_grad(ia)) kernels::matmul_bt_acc(g, t.value(ib).data, t.grad_buffer(ia), m, n, k);
    if (t.requires_grad(ib)) kernels::matmul_at_acc(t.value(ia).data, g, t.grad_buffer(ib), m, k, n);
  };
  return a.tape().record("matmul", {a, b}, fwd, bwd);
}

Var transpose(Var a) {
  require_matrix("transpose", a.value());
  const std::size_t ia = a.id();
  const std::size_t m = a.value().shape[0], n = a.value().shape[1];
  auto fwd = [=](const Tape& t) {
    const auto& x = t.value(ia);
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out.data[j * m + i] = x.data[i * n + j];
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const auto g = t.grad(self);
    auto& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  };
  return a.tape().record("transpose", {a}, fwd, bwd);
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    const auto& y = t.value(ib).data;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += y[i];
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    accumulate(t, ia, t.grad(self));
    accumulate(t, ib, t.grad(self));
  };
  return a.tape().record("add", {a, b}, fwd, bwd);
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    const auto& y = t.value(ib).data;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= y[i];
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    accumulate(t, ia, t.grad(self));
    accumulate(t, ib, t.grad(self), -1.0);
  };
  return a.tape().record("sub", {a, b}, fwd, bwd);
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    const auto& y = t.value(ib).data;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= y[i];
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& x = t.value(ia).data;
    const auto& y = t.value(ib).data;
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
    }
  };
  return a.tape().record("mul", {a, b}, fwd, bwd);
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double c) {
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    for (auto& v : out.data) v *= c;
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) { accumulate(t, ia, t.grad(self), c); };
  return a.tape().record("scale", {a}, fwd, bwd);
}

Var add_scalar(Var a, double c) {
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    for (auto& v : out.data) v += c;
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) { accumulate(t, ia, t.grad(self)); };
  return a.tape().record("add_scalar", {a}, fwd, bwd);
}

Var relu(Var a) {
  return unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var log(Var a) {
  for (double v : a.value().data) {
    if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
  }
  return unary(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var softmax(Var a, std::size_t axis) {
  const Shape shape = a.value().shape;
  if (axis >= shape.size()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for " + shape_str(shape));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    std::vector<double> buf(len);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        for (std::size_t j = 0; j < len; ++j) buf[j] = out.data[base + j * inner];
        kernels::softmax_row(buf);
        for (std::size_t j = 0; j < len; ++j) out.data[base + j * inner] = buf[j];
      }
    }
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const auto g = t.grad(self);
    const auto& y = t.value(self).data;
    auto& ga = t.grad_buffer(ia);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        double dotgy = 0.0;
        for (std::size_t j = 0; j < len; ++j) dotgy += g[base + j * inner] * y[base + j * inner];
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t idx = base + j * inner;
          ga[idx] += y[idx] * (g[idx] - dotgy);
        }
      }
    }
  };
  return a.tape().record("softmax", {a}, fwd, bwd);
}

Var softmax_cross_entropy(Var logits, std::size_t target, double floor) {
  const Tensor& z = logits.value();
  if (z.rank() != 1) throw ShapeError("softmax_cross_entropy: expected a vector, got " + shape_str(z.shape));
  if (target >= z.size()) {
    throw InputError("softmax_cross_entropy: target " + std::to_string(target) + " outside " +
                     std::to_string(z.size()) + " classes");
  }
  const std::size_t ia = logits.id();
  auto fwd = [=](const Tape& t) {
    std::vector<double> p = t.value(ia).data;
    kernels::softmax_row(p);
    return Tensor::scalar(-std::log(std::max(p[target], floor)));
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0];
    std::vector<double> p = t.value(ia).data;
    kernels::softmax_row(p);
    auto& ga = t.grad_buffer(ia);
    for (std::size_t j = 0; j < p.size(); ++j) ga[j] += g * (p[j] - (j == target ? 1.0 : 0.0));
  };
  return logits.tape().record("softmax_cross_entropy", {logits}, fwd, bwd);
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const auto& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("layer_norm: scalar input");
  const std::size_t d = xv.shape.back();
  if (gain.value().size() != d || bias.value().size() != d) {
    throw ShapeError("layer_norm: last dimension " + std::to_string(d) + " vs gain " +
                     shape_str(gain.value().shape) + " / bias " + shape_str(bias.value().shape));
  }
  const std::size_t rows = xv.size() / d;
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ix);
    const auto& g = t.value(ig).data;
    const auto& b = t.value(ib).data;
    for (std::size_t r = 0; r < rows; ++r) {
      double* row = out.data.data() + r * d;
      double mu = 0.0;
      for (std::size_t j = 0; j < d; ++j) mu += row[j];
      mu /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
      var /= static_cast<double>(d);
      const double inv = 1.0 / std::sqrt(var + eps);
      for (std::size_t j = 0; j < d; ++j) row[j] = (row[j] - mu) * inv * g[j] + b[j];
    }
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto go = t.grad(self);
    const auto& xs = t.value(ix).data;
    const auto& g = t.value(ig).data;
    std::vector<double> xhat(d), dxhat(d);
    std::vector<double>* gx = t.requires_grad(ix) ? &t.grad_buffer(ix) : nullptr;
    std::vector<double>* gg = t.requires_grad(ig) ? &t.grad_buffer(ig) : nullptr;
    std::vector<double>* gb = t.requires_grad(ib) ? &t.grad_buffer(ib) : nullptr;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = xs.data() + r * d;
      const double* gr = go.data() + r * d;
      double mu = 0.0;
      for (std::size_t j = 0; j < d; ++j) mu += row[j];
      mu /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
      var /= static_cast<double>(d);
      const double inv = 1.0 / std::sqrt(var + eps);
      double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        xhat[j] = (row[j] - mu) * inv;
        dxhat[j] = gr[j] * g[j];
        mean_dxhat += dxhat[j];
        mean_dxhat_xhat += dxhat[j] * xhat[j];
        if (gg) (*gg)[j] += gr[j] * xhat[j];
        if (gb) (*gb)[j] += gr[j];
      }
      if (!gx) continue;
      mean_dxhat /= static_cast<double>(d);
      mean_dxhat_xhat /= static_cast<double>(d);
      for (std::size_t j = 0; j < d; ++j) {
        (*gx)[r * d + j] += inv * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
      }
    }
  };
  return x.tape().record("layer_norm", {x, gain, bias}, fwd, bwd);
}

Var sum(Var a) {
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) {
    const auto& x = t.value(ia).data;
    return Tensor::scalar(std::accumulate(x.begin(), x.end(), 0.0));
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0];
    for (auto& v : t.grad_buffer(ia)) v += g;
  };
  return a.tape().record("sum", {a}, fwd, bwd);
}

Var mean(Var a) {
  const std::size_t ia = a.id();
  const double n = static_cast<double>(a.value().size());
  auto fwd = [=](const Tape& t) {
    const auto& x = t.value(ia).data;
    return Tensor::scalar(std::accumulate(x.begin(), x.end(), 0.0) / n);
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0] / n;
    for (auto& v : t.grad_buffer(ia)) v += g;
  };
  return a.tape().record("mean", {a}, fwd, bwd);
}

Var reshape(Var a, Shape shape) {
  if (shape_numel(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.value().shape) + " as " + shape_str(shape));
  }
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) { return Tensor(shape, t.value(ia).data); };
  auto bwd = [=](Tape& t, std::size_t self) { accumulate(t, ia, t.grad(self)); };
  return a.tape().record("reshape", {a}, fwd, bwd);
}

Var add_row(Var a, Var b) {
  require_matrix("add_row", a.value());
  const std::size_t m = a.value().shape[0], n = a.value().shape[1];
  if (b.value().size() != n) {
    throw ShapeError("add_row: row vector " + shape_str(b.value().shape) + " vs matrix " +
                     shape_str(a.value().shape));
  }
  const std::size_t ia = a.id(), ib = b.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    const auto& bv = t.value(ib).data;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += bv[j];
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    accumulate(t, ia, g);
    if (!t.requires_grad(ib)) return;
    auto& gb = t.grad_buffer(ib);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
  };
  return a.tape().record("add_row", {a, b}, fwd, bwd);
}

Var scale_rows(Var a, Var s) {
  require_matrix("scale_rows", a.value());
  const std::size_t m = a.value().shape[0], n = a.value().shape[1];
  if (s.value().size() != m) {
    throw ShapeError("scale_rows: scale " + shape_str(s.value().shape) + " vs matrix " +
                     shape_str(a.value().shape));
  }
  const std::size_t ia = a.id(), is = s.id();
  auto fwd = [=](const Tape& t) {
    Tensor out = t.value(ia);
    const auto& sv = t.value(is).data;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] *= sv[i];
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& av = t.value(ia).data;
    const auto& sv = t.value(is).data;
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[i * n + j] * sv[i];
    }
    if (t.requires_grad(is)) {
      auto& gs = t.grad_buffer(is);
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * av[i * n + j];
        gs[i] += acc;
      }
    }
  };
  return a.tape().record("scale_rows", {a, s}, fwd, bwd);
}

Var concat_cols(Var a, Var b) {
  require_matrix("concat_cols", a.value());
  require_matrix("concat_cols", b.value());
  const std::size_t m = a.value().shape[0];
  if (b.value().shape[0] != m) {
    throw ShapeError("concat_cols: row mismatch " + shape_str(a.value().shape) + " vs " +
                     shape_str(b.value().shape));
  }
  const std::size_t na = a.value().shape[1], nb = b.value().shape[1];
  const std::size_t ia = a.id(), ib = b.id();
  auto fwd = [=](const Tape& t) {
    Tensor out({m, na + nb});
    const auto& av = t.value(ia).data;
    const auto& bv = t.value(ib).data;
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(av.begin() + i * na, na, out.data.begin() + i * (na + nb));
      std::copy_n(bv.begin() + i * nb, nb, out.data.begin() + i * (na + nb) + na);
    }
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad_buffer(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < na; ++j) ga[i * na + j] += g[i * (na + nb) + j];
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad_buffer(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < nb; ++j) gb[i * nb + j] += g[i * (na + nb) + na + j];
    }
  };
  return a.tape().record("concat_cols", {a, b}, fwd, bwd);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  require_matrix("concat_rows", parts[0].value());
  const std::size_t n = parts[0].value().shape[1];
  std::vector<std::size_t> ids, row_counts;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix("concat_rows", p.value());
    if (p.value().shape[1] != n) {
      throw ShapeError("concat_rows: column mismatch " + shape_str(parts[0].value().shape) + " vs " +
                       shape_str(p.value().shape));
    }
    ids.push_back(p.id());
    row_counts.push_back(p.value().shape[0]);
    total += p.value().shape[0];
  }
  auto fwd = [=](const Tape& t) {
    Tensor out({total, n});
    auto dst = out.data.begin();
    for (auto id : ids) dst = std::copy(t.value(id).data.begin(), t.value(id).data.end(), dst);
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      const std::size_t len = row_counts[p] * n;
      accumulate(t, ids[p], g.subspan(offset, len));
      offset += len;
    }
  };
  return parts[0].tape().record("concat_rows", std::vector<Var>(parts.begin(), parts.end()), fwd, bwd);
}

Var gather_rows(Var a, std::vector<std::size_t> rows) {
  require_matrix("gather_rows", a.value());
  const std::size_t m = a.value().shape[0], n = a.value().shape[1];
  for (auto r : rows) {
    if (r >= m) throw ShapeError("gather_rows: row " + std::to_string(r) + " out of " + shape_str(a.value().shape));
  }
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) {
    Tensor out({rows.size(), n});
    const auto& av = t.value(ia).data;
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy_n(av.begin() + rows[i] * n, n, out.data.begin() + i * n);
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const auto g = t.grad(self);
    auto& ga = t.grad_buffer(ia);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) ga[rows[i] * n + j] += g[i * n + j];
  };
  return a.tape().record("gather_rows", {a}, fwd, bwd);
}

Var row_cosine(Var a, Var b) {
  require_same_shape("row_cosine", a.value(), b.value());
  require_matrix("row_cosine", a.value());
  const std::size_t m = a.value().shape[0], n = a.value().shape[1];
  constexpr double kMinNorm = 1e-12;
  const std::size_t ia = a.id(), ib = b.id();
  auto fwd = [=](const Tape& t) {
    Tensor out({m});
    const auto& av = t.value(ia);
    const auto& bv = t.value(ib);
    for (std::size_t i = 0; i < m; ++i) {
      const double sa = kernels::dot(av.row(i), av.row(i)), sb = kernels::dot(bv.row(i), bv.row(i));
      // sqrt(sa·sb) rather than ‖a‖·‖b‖ so that cos(a, a) is exactly 1.
      out.data[i] = (std::sqrt(sa) < kMinNorm || std::sqrt(sb) < kMinNorm)
                        ? 0.0
                        : kernels::dot(av.row(i), bv.row(i)) / std::sqrt(sa * sb);
    }
    return out;
  };
  auto bwd = [=](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    const auto& av = t.value(ia);
    const auto& bv = t.value(ib);
    const auto& s = t.value(self).data;
    std::vector<double>* ga = t.requires_grad(ia) ? &t.grad_buffer(ia) : nullptr;
    std::vector<double>* gb = t.requires_grad(ib) ? &t.grad_buffer(ib) : nullptr;
    for (std::size_t i = 0; i < m; ++i) {
      const double na = kernels::norm2(av.row(i)), nb = kernels::norm2(bv.row(i));
      if (na < kMinNorm || nb < kMinNorm) continue;
      const auto ar = av.row(i), br = bv.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (ga) (*ga)[i * n + j] += g[i] * (br[j] / (na * nb) - s[i] * ar[j] / (na * na));
        if (gb) (*gb)[i * n + j] += g[i] * (ar[j] / (na * nb) - s[i] * br[j] / (nb * nb));
      }
    }
  };
  return a.tape().record("row_cosine", {a, b}, fwd, bwd);
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var pick(Var a, std::size_t index) {
  if (index >= a.value().size()) {
    throw ShapeError("pick: index " + std::to_string(index) + " out of " + shape_str(a.value().shape));
  }
  const std::size_t ia = a.id();
  auto fwd = [=](const Tape& t) { return Tensor::scalar(t.value(ia).data[index]); };
  auto bwd = [=](Tape& t, std::size_t self) {
    if (t.requires_grad(ia)) t.grad_buffer(ia)[index] += t.grad(self)[0];
  };
  return a.tape().record("pick", {a}, fwd, bwd);
}

Var grouped_attention(Var q, Var k, Var v, TokenGroups groups, std::size_t heads) {
  const auto& qv = q.value();
  const auto& kv = k.value();
  const auto& vv = v.value();
  require_matrix("grouped_attention", qv);
  require_same_shape("grouped_attention", qv, kv);
  require_matrix("grouped_attention", vv);
  const std::size_t m = qv.shape[0];
  if (vv.shape[0] != m) throw ShapeError("grouped_attention: value rows " + shape_str(vv.shape) + " vs " + shape_str(qv.shape));
  if (heads == 0 || qv.shape[1] % heads || vv.shape[1] % heads) {
    throw ShapeError("grouped_attention: widths " + shape_str(qv.shape) + "/" + shape_str(vv.shape) +
                     " not divisible by " + std::to_string(heads) + " heads");
  }
  for (const auto& g : groups)
    for (auto r : g)
      if (r >= m) throw ShapeError("grouped_attention: token " + std::to_string(r) + " out of range");

  const std::size_t dk = qv.shape[1] / heads, dv = vv.shape[1] / heads;
  const std::size_t wv = vv.shape[1];
  const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));

  auto fwd = [=](const Tape& t) {
    const auto& vals = t.value(iv);
    Tensor out({m, wv});
    for (const auto& group : groups) {
      const std::size_t g = group.size();
      for (std::size_t h = 0; h < heads; ++h) {
        const auto p = attention_probs(t.value(iq), t.value(ik), group, h, heads);
        std::vector<std::size_t> order(g);
        for (std::size_t i = 0; i < g; ++i) {
          double* o = out.data.data() + group[i] * wv + h * dv;
          // Accumulate in an order fixed by (weight, value) so that permuting
          // the group's tokens permutes the output bit-for-bit.
          std::iota(order.begin(), order.end(), 0);
          std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (p[i * g + a] != p[i * g + b]) return p[i * g + a] < p[i * g + b];
            const double* va = vals.data.data() + group[a] * wv + h * dv;
            const double* vb = vals.data.data() + group[b] * wv + h * dv;
            return std::lexicographical_compare(va, va + dv, vb, vb + dv);
          });
          for (std::size_t j : order) {
            const double pij = p[i * g + j];
            const double* vj = vals.data.data() + group[j] * wv + h * dv;
            for (std::size_t c = 0; c < dv; ++c) o[c] += pij * vj[c];
          }
        }
      }
    }
    return out;
  };

  auto bwd = [=](Tape& t, std::size_t self) {
    const auto go = t.grad(self);
    const auto& qs = t.value(iq);
    const auto& ks = t.value(ik);
    const auto& vs = t.value(iv);
    std::vector<double>* gq = t.requires_grad(iq) ? &t.grad_buffer(iq) : nullptr;
    std::vector<double>* gk = t.requires_grad(ik) ? &t.grad_buffer(ik) : nullptr;
    std::vector<double>* gv = t.requires_grad(iv) ? &t.grad_buffer(iv) : nullptr;
    const std::size_t wq = qs.shape[1];
    for (const auto& group : groups) {
      const std::size_t g = group.size();
      std::vector<double> dp(g * g);
      for (std::size_t h = 0; h < heads; ++h) {
        const auto p = attention_probs(qs, ks, group, h, heads);
        // dP = dO·Vᵀ, dV += Pᵀ·dO
        for (std::size_t i = 0; i < g; ++i) {
          const double* doi = go.data() + group[i] * wv + h * dv;
          for (std::size_t j = 0; j < g; ++j) {
            const double* vj = vs.data.data() + group[j] * wv + h * dv;
            double s = 0.0;
            for (std::size_t c = 0; c < dv; ++c) s += doi[c] * vj[c];
            dp[i * g + j] = s;
            if (gv) {
              double* gvj = gv->data() + group[j] * wv + h * dv;
              const double pij = p[i * g + j];
              for (std::size_t c = 0; c < dv; ++c) gvj[c] += pij * doi[c];
            }
          }
        }
        // dS = P ⊙ (dP − rowsum(dP ⊙ P)), scaled into dQ and dK
        for (std::size_t i = 0; i < g; ++i) {
          double rs = 0.0;
          for (std::size_t j = 0; j < g; ++j) rs += dp[i * g + j] * p[i * g + j];
          const double* qi = qs.data.data() + group[i] * wq + h * dk;
          for (std::size_t j = 0; j < g; ++j) {
            const double ds = p[i * g + j] * (dp[i * g + j] - rs) * inv_sqrt;
            if (ds == 0.0) continue;
            const double* kj = ks.data.data() + group[j] * wq + h * dk;
            if (gq) {
              double* gqi = gq->data() + group[i] * wq + h * dk;
              for (std::size_t c = 0; c < dk; ++c) gqi[c] += ds * kj[c];
            }
            if (gk) {
              double* gkj = gk->data() + group[j] * wq + h * dk;
              for (std::size_t c = 0; c < dk; ++c) gkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
  };
  return q.tape().record("grouped_attention", {q, k, v}, fwd, bwd);
}

}  // namespace ops
}  // namespace ucf
