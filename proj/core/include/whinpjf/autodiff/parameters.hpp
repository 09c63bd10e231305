#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whinpjf/autodiff/matrix.hpp"
#include "whinpjf/autodiff/tape.hpp"
#include "whinpjf/common/random.hpp"

namespace whinpjf::ad {

using ParamHandle = std::size_t;

/// Named, ordered set of trainable matrices.
template <typename T>
class ParameterStore {
 public:
  ParamHandle add(std::string name, Matrix<T> init) {
    if (find(name)) throw ContractError("duplicate parameter name: " + name);
    names_.push_back(std::move(name));
    values_.push_back(std::move(init));
    return values_.size() - 1;
  }

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(ParamHandle h) const { return names_.at(h); }
  Matrix<T>& value(ParamHandle h) { return values_.at(h); }
  const Matrix<T>& value(ParamHandle h) const { return values_.at(h); }

  std::optional<ParamHandle> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    return std::nullopt;
  }
  ParamHandle at(std::string_view name) const {
    if (auto h = find(name)) return *h;
    throw ContractError("unknown parameter: " + std::string(name));
  }
  Matrix<T>& operator[](std::string_view name) { return values_[at(name)]; }
  const Matrix<T>& operator[](std::string_view name) const { return values_[at(name)]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (std::size_t i = 0; i < values_.size(); ++i) out.add(names_[i], values_[i].template cast<U>());
    return out;
  }

  bool all_finite() const {
    for (const auto& v : values_) {
      if (!v.all_finite()) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix<T>> values_;
};

/// Tape handles for every parameter of a store, recorded as trainable leaves.
template <typename T>
class BoundParameters {
 public:
  BoundParameters(Tape<T>& tape, const ParameterStore<T>& store) {
    vars_.reserve(store.size());
    for (ParamHandle h = 0; h < store.size(); ++h) vars_.push_back(tape.leaf(store.value(h), true));
  }

  /// Wraps existing leaves, e.g. those created by a gradient checker.
  explicit BoundParameters(std::vector<Var> vars) : vars_(std::move(vars)) {}

  Var operator[](ParamHandle h) const { return vars_.at(h); }
  std::size_t size() const noexcept { return vars_.size(); }

  /// Gradients in parameter order; call after tape.backward().
  std::vector<Matrix<T>> gradients(const Tape<T>& tape) const {
    std::vector<Matrix<T>> out;
    out.reserve(vars_.size());
    for (Var v : vars_) out.push_back(tape.grad(v));
    return out;
  }

 private:
  std::vector<Var> vars_;
};

/// Element-wise in-place sum `into += other`, used to reduce shard gradients.
template <typename T>
void accumulate_gradients(std::vector<Matrix<T>>& into, const std::vector<Matrix<T>>& other) {
  if (into.empty()) {
    into = other;
    return;
  }
  for (std::size_t i = 0; i < into.size(); ++i) {
    T* d = into[i].data();
    const T* s = other[i].data();
    for (std::size_t k = 0; k < into[i].size(); ++k) d[k] += s[k];
  }
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam optimizer with bias-corrected moment estimates.
template <typename T>
class Adam {
 public:
  Adam(AdamConfig config, const ParameterStore<T>& store) : config_(config) {
    for (ParamHandle h = 0; h < store.size(); ++h) {
      first_.emplace_back(store.value(h).rows(), store.value(h).cols());
      second_.emplace_back(store.value(h).rows(), store.value(h).cols());
    }
  }

  void step(ParameterStore<T>& store, const std::vector<Matrix<T>>& grads);
  std::size_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::vector<Matrix<T>> first_;
  std::vector<Matrix<T>> second_;
  std::size_t step_ = 0;
};

/// Glorot/Xavier uniform initialization in [-a, a], a = sqrt(6 / (rows + cols)).
Matrix<float> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

/// Uniform initialization in [-bound, bound].
Matrix<float> uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace whinpjf::ad
