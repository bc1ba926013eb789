#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ucf/tensor.hpp"

namespace ucf {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor velocity;
  std::vector<double> grad;
  // Set by Tape::backward for every parameter the loss was recorded against.
  bool has_grad = false;

  Parameter(std::string n, Tensor v);
  void zero_grad();
};

using Rng = std::mt19937_64;

// Owns every trainable tensor of a model. Addresses are stable for the
// lifetime of the store, so model components may hold Parameter references.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(const std::string& name, Tensor value);
  // Uniform in ±sqrt(6/(fan_in+fan_out)).
  Parameter& add_weight(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  Parameter& add_zeros(const std::string& name, Shape shape);
  Parameter& add_filled(const std::string& name, Shape shape, double value);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ucf
