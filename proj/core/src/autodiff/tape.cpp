#include "whinpjf/autodiff/tape.hpp"

#include <cmath>
#include <string>

namespace whinpjf::ad {
namespace {

template <typename T>
void require_same_shape(std::string_view op, const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
void add_into(Matrix<T>& dst, const Matrix<T>& src, T factor = T(1)) {
  T* __restrict d = dst.data();
  const T* __restrict s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += factor * s[i];
}

}  // namespace

template <typename T>
Var Tape<T>::push(Matrix<T> value, bool requires_grad, std::string_view op,
                  std::function<void(Tape&, std::uint32_t)> backward) {
  if (check_finite_ && !value.all_finite()) {
    throw NumericError("non-finite value produced by op '" + std::string(op) + "' at tape index " +
                       std::to_string(nodes_.size()));
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) throw ContractError("tape: invalid variable handle");
  return nodes_[v.id];
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ContractError("tape: invalid variable handle");
  return nodes_[v.id];
}

template <typename T>
Matrix<T>& Tape<T>::grad_slot(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix<T>(n.value.rows(), n.value.cols());
  return n.grad;
}

template <typename T>
bool Tape<T>::any_requires_grad(std::initializer_list<Var> vars) const {
  for (Var v : vars) {
    if (node(v).requires_grad) return true;
  }
  return false;
}

template <typename T>
Var Tape<T>::leaf(Matrix<T> value, bool trainable) {
  if (check_finite_ && !value.all_finite()) throw NumericError("non-finite leaf value");
  Node n;
  n.value = std::move(value);
  n.requires_grad = trainable;
  n.trainable = trainable;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
const Matrix<T>& Tape<T>::value(Var v) const {
  return node(v).value;
}

template <typename T>
const Matrix<T>& Tape<T>::grad(Var v) const {
  const Node& n = node(v);
  if (!backward_done_) throw ContractError("tape: grad requested before backward");
  if (n.grad.empty() && !n.value.empty()) {
    throw ContractError("tape: no gradient recorded for this value (not trainable or unreachable)");
  }
  return n.grad;
}

template <typename T>
bool Tape<T>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

// ---------------------------------------------------------------- products

template <typename T>
Var Tape<T>::matmul(Var a, Var b) {
  const Matrix<T>& av = value(a);
  const Matrix<T>& bv = value(b);
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: shapes " + shape_string(av) + " and " + shape_string(bv) +
                         " are incompatible");
  }
  Matrix<T> out(av.rows(), bv.cols());
  gemm_nn(av, bv, out);
  return push(std::move(out), any_requires_grad({a, b}), "matmul",
              [a, b](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                if (t.nodes_[a.id].requires_grad) {
                  gemm_nt(g, t.nodes_[b.id].value, t.grad_slot(a.id), true);
                }
                if (t.nodes_[b.id].requires_grad) {
                  gemm_tn(t.nodes_[a.id].value, g, t.grad_slot(b.id), true);
                }
              });
}

template <typename T>
Var Tape<T>::matmul_nt(Var a, Var b) {
  const Matrix<T>& av = value(a);
  const Matrix<T>& bv = value(b);
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_nt: shapes " + shape_string(av) + " and " + shape_string(bv) +
                         "^T are incompatible");
  }
  Matrix<T> out(av.rows(), bv.rows());
  gemm_nt(av, bv, out);
  return push(std::move(out), any_requires_grad({a, b}), "matmul_nt",
              [a, b](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                if (t.nodes_[a.id].requires_grad) {
                  gemm_nn(g, t.nodes_[b.id].value, t.grad_slot(a.id), true);
                }
                if (t.nodes_[b.id].requires_grad) {
                  gemm_tn(g, t.nodes_[a.id].value, t.grad_slot(b.id), true);
                }
              });
}

template <typename T>
Var Tape<T>::transpose(Var a) {
  return push(ad::transpose(value(a)), any_requires_grad({a}), "transpose",
              [a](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t r = 0; r < g.rows(); ++r) {
                  for (std::size_t c = 0; c < g.cols(); ++c) da(c, r) += g(r, c);
                }
              });
}

// ------------------------------------------------------------- elementwise

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const Matrix<T>& av = value(a);
  const Matrix<T>& bv = value(b);
  require_same_shape("add", av, bv);
  Matrix<T> out = av;
  add_into(out, bv);
  return push(std::move(out), any_requires_grad({a, b}), "add",
              [a, b](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                if (t.nodes_[a.id].requires_grad) add_into(t.grad_slot(a.id), g);
                if (t.nodes_[b.id].requires_grad) add_into(t.grad_slot(b.id), g);
              });
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  const Matrix<T>& av = value(a);
  const Matrix<T>& bv = value(b);
  require_same_shape("sub", av, bv);
  Matrix<T> out = av;
  add_into(out, bv, T(-1));
  return push(std::move(out), any_requires_grad({a, b}), "sub",
              [a, b](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                if (t.nodes_[a.id].requires_grad) add_into(t.grad_slot(a.id), g);
                if (t.nodes_[b.id].requires_grad) add_into(t.grad_slot(b.id), g, T(-1));
              });
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  const Matrix<T>& av = value(a);
  const Matrix<T>& bv = value(b);
  require_same_shape("mul", av, bv);
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = av.data()[i] * bv.data()[i];
  return push(std::move(out), any_requires_grad({a, b}), "mul",
              [a, b](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                if (t.nodes_[a.id].requires_grad) {
                  Matrix<T>& da = t.grad_slot(a.id);
                  const Matrix<T>& bv = t.nodes_[b.id].value;
                  for (std::size_t i = 0; i < g.size(); ++i) da.data()[i] += g.data()[i] * bv.data()[i];
                }
                if (t.nodes_[b.id].requires_grad) {
                  Matrix<T>& db = t.grad_slot(b.id);
                  const Matrix<T>& av = t.nodes_[a.id].value;
                  for (std::size_t i = 0; i < g.size(); ++i) db.data()[i] += g.data()[i] * av.data()[i];
                }
              });
}

template <typename T>
Var Tape<T>::scale(Var a, T factor) {
  Matrix<T> out = value(a);
  for (T& v : out.values()) v *= factor;
  return push(std::move(out), any_requires_grad({a}), "scale",
              [a, factor](Tape& t, std::uint32_t self) {
                add_into(t.grad_slot(a.id), t.nodes_[self].grad, factor);
              });
}

template <typename T>
Var Tape<T>::relu(Var a) {
  const Matrix<T>& av = value(a);
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) {
    const T x = av.data()[i];
    out.data()[i] = x > T(0) ? x : T(0);
    const T margin = std::abs(x);
    if (margin < min_relu_margin_) min_relu_margin_ = margin;
  }
  return push(std::move(out), any_requires_grad({a}), "relu", [a](Tape& t, std::uint32_t self) {
    const Matrix<T>& g = t.nodes_[self].grad;
    const Matrix<T>& x = t.nodes_[a.id].value;
    Matrix<T>& da = t.grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x.data()[i] > T(0)) da.data()[i] += g.data()[i];
    }
  });
}

template <typename T>
Var Tape<T>::sigmoid(Var a) {
  const Matrix<T>& av = value(a);
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out.data()[i] = stable_sigmoid(av.data()[i]);
  return push(std::move(out), any_requires_grad({a}), "sigmoid",
              [a](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                const Matrix<T>& y = t.nodes_[self].value;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t i = 0; i < g.size(); ++i) {
                  const T s = y.data()[i];
                  da.data()[i] += g.data()[i] * s * (T(1) - s);
                }
              });
}

template <typename T>
Var Tape<T>::add_bias(Var a, Var bias) {
  const Matrix<T>& av = value(a);
  const Matrix<T>& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw DimensionError("add_bias: bias " + shape_string(bv) + " does not fit " +
                         shape_string(av));
  }
  Matrix<T> out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv(0, c);
  }
  return push(std::move(out), any_requires_grad({a, bias}), "add_bias",
              [a, bias](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                if (t.nodes_[a.id].requires_grad) add_into(t.grad_slot(a.id), g);
                if (t.nodes_[bias.id].requires_grad) {
                  Matrix<T>& db = t.grad_slot(bias.id);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    for (std::size_t c = 0; c < g.cols(); ++c) db(0, c) += g(r, c);
                  }
                }
              });
}

// -------------------------------------------------------------- reductions

template <typename T>
Var Tape<T>::mean_rows(Var a) {
  const Matrix<T>& av = value(a);
  if (av.rows() == 0) throw EmptyInputError("mean_rows: operand has zero rows");
  Matrix<T> out(1, av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out(0, c) += av(r, c);
  }
  const T inv = T(1) / static_cast<T>(av.rows());
  for (T& v : out.values()) v *= inv;
  return push(std::move(out), any_requires_grad({a}), "mean_rows",
              [a](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                const T inv = T(1) / static_cast<T>(da.rows());
                for (std::size_t r = 0; r < da.rows(); ++r) {
                  for (std::size_t c = 0; c < da.cols(); ++c) da(r, c) += g(0, c) * inv;
                }
              });
}

template <typename T>
Var Tape<T>::sum_rows(Var a) {
  const Matrix<T>& av = value(a);
  if (av.rows() == 0) throw EmptyInputError("sum_rows: operand has zero rows");
  Matrix<T> out(1, av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out(0, c) += av(r, c);
  }
  return push(std::move(out), any_requires_grad({a}), "sum_rows",
              [a](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t r = 0; r < da.rows(); ++r) {
                  for (std::size_t c = 0; c < da.cols(); ++c) da(r, c) += g(0, c);
                }
              });
}

template <typename T>
Var Tape<T>::sum_all(Var a) {
  const Matrix<T>& av = value(a);
  if (av.empty()) throw EmptyInputError("sum_all: empty operand");
  T total = T(0);
  for (T v : av.values()) total += v;
  return push(Matrix<T>(1, 1, total), any_requires_grad({a}), "sum_all",
              [a](Tape& t, std::uint32_t self) {
                const T g = t.nodes_[self].grad(0, 0);
                for (T& v : t.grad_slot(a.id).values()) v += g;
              });
}

template <typename T>
Var Tape<T>::softmax_rows(Var a) {
  const Matrix<T>& av = value(a);
  if (av.cols() == 0) throw EmptyInputError("softmax_rows: operand has zero columns");
  Matrix<T> out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto in = av.row(r);
    auto o = out.row(r);
    T peak = in[0];
    for (T v : in) peak = v > peak ? v : peak;
    T total = T(0);
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - peak);
      total += o[c];
    }
    const T inv = T(1) / total;
    for (T& v : o) v *= inv;
  }
  return push(std::move(out), any_requires_grad({a}), "softmax_rows",
              [a](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                const Matrix<T>& y = t.nodes_[self].value;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t r = 0; r < y.rows(); ++r) {
                  T dot = T(0);
                  for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                  for (std::size_t c = 0; c < y.cols(); ++c) da(r, c) += y(r, c) * (g(r, c) - dot);
                }
              });
}

template <typename T>
Var Tape<T>::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw EmptyInputError("concat_cols: no operands");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  bool needs_grad = false;
  for (Var p : parts) {
    const Matrix<T>& pv = value(p);
    if (pv.rows() != rows) {
      throw DimensionError("concat_cols: row count " + std::to_string(pv.rows()) + " vs " +
                           std::to_string(rows));
    }
    cols += pv.cols();
    needs_grad = needs_grad || node(p).requires_grad;
  }
  Matrix<T> out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix<T>& pv = value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + offset);
    }
    offset += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(out), needs_grad, "concat_cols",
              [inputs = std::move(inputs)](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                std::size_t offset = 0;
                for (Var p : inputs) {
                  const std::size_t w = t.nodes_[p.id].value.cols();
                  if (t.nodes_[p.id].requires_grad) {
                    Matrix<T>& dp = t.grad_slot(p.id);
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                      for (std::size_t c = 0; c < w; ++c) dp(r, c) += g(r, offset + c);
                    }
                  }
                  offset += w;
                }
              });
}

template <typename T>
Var Tape<T>::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw EmptyInputError("concat_rows: no operands");
  const std::size_t cols = value(parts[0]).cols();
  std::size_t rows = 0;
  bool needs_grad = false;
  for (Var p : parts) {
    const Matrix<T>& pv = value(p);
    if (pv.cols() != cols) {
      throw DimensionError("concat_rows: column count " + std::to_string(pv.cols()) + " vs " +
                           std::to_string(cols));
    }
    rows += pv.rows();
    needs_grad = needs_grad || node(p).requires_grad;
  }
  Matrix<T> out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix<T>& pv = value(p);
    std::copy(pv.values().begin(), pv.values().end(), out.data() + offset * cols);
    offset += pv.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(out), needs_grad, "concat_rows",
              [inputs = std::move(inputs)](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                std::size_t offset = 0;
                for (Var p : inputs) {
                  const Matrix<T>& pv = t.nodes_[p.id].value;
                  if (t.nodes_[p.id].requires_grad) {
                    Matrix<T>& dp = t.grad_slot(p.id);
                    const T* src = g.data() + offset * g.cols();
                    for (std::size_t i = 0; i < dp.size(); ++i) dp.data()[i] += src[i];
                  }
                  offset += pv.rows();
                }
              });
}

template <typename T>
Var Tape<T>::slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Matrix<T>& av = value(a);
  if (begin + count > av.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_string(av));
  }
  Matrix<T> out(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = av(r, begin + c);
  }
  return push(std::move(out), any_requires_grad({a}), "slice_cols",
              [a, begin](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t r = 0; r < g.rows(); ++r) {
                  for (std::size_t c = 0; c < g.cols(); ++c) da(r, begin + c) += g(r, c);
                }
              });
}

template <typename T>
Var Tape<T>::slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Matrix<T>& av = value(a);
  if (begin + count > av.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_string(av));
  }
  const std::size_t cols = av.cols();
  std::vector<T> values(av.data() + begin * cols, av.data() + (begin + count) * cols);
  return push(Matrix<T>(count, cols, std::move(values)), any_requires_grad({a}), "slice_rows",
              [a, begin](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                T* dst = da.data() + begin * da.cols();
                for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g.data()[i];
              });
}

template <typename T>
Var Tape<T>::gather_rows(Var a, std::vector<std::uint32_t> index) {
  const Matrix<T>& av = value(a);
  Matrix<T> out(index.size(), av.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= av.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(index[i]) + " outside " +
                           shape_string(av));
    }
    std::copy(av.row(index[i]).begin(), av.row(index[i]).end(), out.row(i).begin());
  }
  return push(std::move(out), any_requires_grad({a}), "gather_rows",
              [a, index = std::move(index)](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t i = 0; i < index.size(); ++i) {
                  auto src = g.row(i);
                  auto dst = da.row(index[i]);
                  for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                }
              });
}

template <typename T>
Var Tape<T>::scatter_add_rows(Var a, std::vector<std::uint32_t> index, std::size_t out_rows) {
  const Matrix<T>& av = value(a);
  if (index.size() != av.rows()) {
    throw DimensionError("scatter_add_rows: " + std::to_string(index.size()) +
                         " indices for " + shape_string(av));
  }
  Matrix<T> out(out_rows, av.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= out_rows) {
      throw DimensionError("scatter_add_rows: target row " + std::to_string(index[i]) +
                           " outside " + std::to_string(out_rows) + " rows");
    }
    auto src = av.row(i);
    auto dst = out.row(index[i]);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  return push(std::move(out), any_requires_grad({a}), "scatter_add_rows",
              [a, index = std::move(index)](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                for (std::size_t i = 0; i < index.size(); ++i) {
                  auto src = g.row(index[i]);
                  auto dst = da.row(i);
                  for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                }
              });
}

template <typename T>
Var Tape<T>::aggregate(Var a, std::shared_ptr<const RowAggregation<T>> plan) {
  if (!plan) throw ContractError("aggregate: null plan");
  const Matrix<T>& av = value(a);
  const std::size_t cols = av.cols();
  if (plan->index.size() != plan->weight.size() || plan->offsets.back() != plan->index.size()) {
    throw ContractError("aggregate: inconsistent plan");
  }
  Matrix<T> out(plan->out_rows(), cols);
  for (std::size_t i = 0; i < plan->out_rows(); ++i) {
    T* __restrict dst = out.data() + i * cols;
    for (std::uint32_t k = plan->offsets[i]; k < plan->offsets[i + 1]; ++k) {
      const std::uint32_t src_row = plan->index[k];
      if (src_row >= av.rows()) {
        throw DimensionError("aggregate: source row " + std::to_string(src_row) + " outside " +
                             shape_string(av));
      }
      const T w = plan->weight[k];
      const T* __restrict src = av.data() + src_row * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += w * src[c];
    }
  }
  return push(std::move(out), any_requires_grad({a}), "aggregate",
              [a, plan = std::move(plan)](Tape& t, std::uint32_t self) {
                const Matrix<T>& g = t.nodes_[self].grad;
                Matrix<T>& da = t.grad_slot(a.id);
                const std::size_t cols = g.cols();
                for (std::size_t i = 0; i < plan->out_rows(); ++i) {
                  const T* __restrict src = g.data() + i * cols;
                  for (std::uint32_t k = plan->offsets[i]; k < plan->offsets[i + 1]; ++k) {
                    const T w = plan->weight[k];
                    T* __restrict dst = da.data() + plan->index[k] * cols;
                    for (std::size_t c = 0; c < cols; ++c) dst[c] += w * src[c];
                  }
                }
              });
}

// ------------------------------------------------------------------ losses

template <typename T>
Var Tape<T>::bce_with_logits(Var logits, const Matrix<T>& labels) {
  const Matrix<T>& x = value(logits);
  require_same_shape("bce_with_logits", x, labels);
  if (x.empty()) throw EmptyInputError("bce_with_logits: empty batch");
  T total = T(0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x.data()[i];
    const T y = labels.data()[i];
    // -(y log s + (1-y) log(1-s)) with s = sigmoid(v)
    total += (v > T(0) ? v : T(0)) - v * y + std::log1p(std::exp(-std::abs(v)));
  }
  const T n = static_cast<T>(x.size());
  return push(Matrix<T>(1, 1, total / n), any_requires_grad({logits}), "bce_with_logits",
              [logits, labels](Tape& t, std::uint32_t self) {
                const T g = t.nodes_[self].grad(0, 0);
                const Matrix<T>& xv = t.nodes_[logits.id].value;
                Matrix<T>& dx = t.grad_slot(logits.id);
                const T scale = g / static_cast<T>(xv.size());
                for (std::size_t i = 0; i < xv.size(); ++i) {
                  dx.data()[i] += scale * (stable_sigmoid(xv.data()[i]) - labels.data()[i]);
                }
              });
}

// ---------------------------------------------------------------- backward

template <typename T>
void Tape<T>::backward(Var loss) {
  if (backward_done_) throw ContractError("backward: tape was already differentiated");
  const Matrix<T>& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be a 1x1 scalar, got " + shape_string(lv));
  }
  backward_done_ = true;
  if (nodes_[loss.id].requires_grad) {
    grad_slot(loss.id)(0, 0) = T(1);
    for (std::uint32_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
      n.backward(*this, i);
    }
  }
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].trainable) grad_slot(i);
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace whinpjf::ad
