#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "whinpjf/autodiff/matrix.hpp"

namespace whinpjf::ad {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t id = kInvalid;

  bool valid() const noexcept { return id != kInvalid; }
  friend bool operator==(Var, Var) = default;
};

/// Weighted row aggregation: out[i] = sum_k weight[k] * x[index[k]] for
/// k in [offsets[i], offsets[i+1]). Shared between forward and backward.
template <typename T>
struct RowAggregation {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> index;
  std::vector<T> weight;

  std::size_t out_rows() const noexcept { return offsets.size() - 1; }
};

/// Reverse-mode automatic differentiation over dense matrices.
///
/// Values are appended in evaluation order, so reverse insertion order is a
/// reverse topological order. A tape supports exactly one backward pass.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// Record an input. Trainable leaves always receive a gradient.
  Var leaf(Matrix<T> value, bool trainable = false);
  Var constant(Matrix<T> value) { return leaf(std::move(value), false); }

  const Matrix<T>& value(Var v) const;
  /// Gradient of the loss w.r.t. v; valid after backward() for every
  /// trainable leaf and every value the loss depended on.
  const Matrix<T>& grad(Var v) const;
  bool requires_grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Throw NumericError as soon as an op produces NaN/Inf.
  void set_check_finite(bool enabled) noexcept { check_finite_ = enabled; }

  /// Smallest |x| seen at the input of any relu op (gradient-check helper:
  /// finite differences are only meaningful away from the kink).
  T min_relu_margin() const noexcept { return min_relu_margin_; }

  // --- products ---
  Var matmul(Var a, Var b);
  /// a * b^T
  Var matmul_nt(Var a, Var b);
  Var transpose(Var a);

  // --- elementwise ---
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, T factor);
  Var relu(Var a);
  Var sigmoid(Var a);
  /// a + bias with bias of shape 1 x a.cols(), added to every row.
  Var add_bias(Var a, Var bias);

  // --- reductions and structure ---
  Var mean_rows(Var a);
  Var sum_rows(Var a);
  Var sum_all(Var a);
  Var softmax_rows(Var a);
  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var slice_cols(Var a, std::size_t begin, std::size_t count);
  Var slice_rows(Var a, std::size_t begin, std::size_t count);
  Var gather_rows(Var a, std::vector<std::uint32_t> index);
  /// out (out_rows x cols) with out[index[i]] += a[i].
  Var scatter_add_rows(Var a, std::vector<std::uint32_t> index, std::size_t out_rows);
  Var aggregate(Var a, std::shared_ptr<const RowAggregation<T>> plan);

  // --- losses ---
  /// Mean binary cross-entropy of sigmoid(logits) against labels in {0,1},
  /// evaluated in the stable log-sum-exp form. Returns a 1x1 value.
  Var bce_with_logits(Var logits, const Matrix<T>& labels);

  /// Reverse pass from a 1x1 loss. A second call is rejected.
  void backward(Var loss);

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool requires_grad = false;
    bool trainable = false;
    std::function<void(Tape&, std::uint32_t)> backward;
  };

  Var push(Matrix<T> value, bool requires_grad, std::string_view op,
           std::function<void(Tape&, std::uint32_t)> backward);
  Node& node(Var v);
  const Node& node(Var v) const;
  /// Gradient slot of v, zero-initialized on first use.
  Matrix<T>& grad_slot(std::uint32_t id);
  bool any_requires_grad(std::initializer_list<Var> vars) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
  bool check_finite_ = false;
  T min_relu_margin_ = std::numeric_limits<T>::infinity();
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace whinpjf::ad
