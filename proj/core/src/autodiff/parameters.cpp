#include "whinpjf/autodiff/parameters.hpp"

#include <cmath>

namespace whinpjf::ad {

template <typename T>
void Adam<T>::step(ParameterStore<T>& store, const std::vector<Matrix<T>>& grads) {
  if (grads.size() != store.size()) {
    throw ContractError("adam: " + std::to_string(grads.size()) + " gradients for " +
                        std::to_string(store.size()) + " parameters");
  }
  ++step_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const double step_size = config_.learning_rate / correction1;
  const T b1 = static_cast<T>(config_.beta1);
  const T b2 = static_cast<T>(config_.beta2);
  for (ParamHandle h = 0; h < store.size(); ++h) {
    Matrix<T>& w = store.value(h);
    const Matrix<T>& g = grads[h];
    if (g.rows() != w.rows() || g.cols() != w.cols()) {
      throw DimensionError("adam: gradient " + shape_string(g) + " for parameter " +
                           store.name(h) + " of shape " + shape_string(w));
    }
    T* m = first_[h].data();
    T* v = second_[h].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const T gi = g.data()[i];
      m[i] = b1 * m[i] + (T(1) - b1) * gi;
      v[i] = b2 * v[i] + (T(1) - b2) * gi * gi;
      const double denom = std::sqrt(static_cast<double>(v[i]) / correction2) + config_.epsilon;
      w.data()[i] -= static_cast<T>(step_size * static_cast<double>(m[i]) / denom);
    }
  }
}

Matrix<float> glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_matrix(rows, cols, bound, rng);
}

Matrix<float> uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix<float> out(rows, cols);
  for (float& v : out.values()) v = static_cast<float>(rng.uniform(-bound, bound));
  return out;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace whinpjf::ad
