#include "whinpjf/common/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace whinpjf {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<std::uint32_t> Rng::choose_sorted(std::uint32_t n, std::uint32_t k) {
  if (k > n) throw std::invalid_argument("choose_sorted: k exceeds n");
  std::vector<std::uint32_t> out;
  out.reserve(k);
  // Knuth's Algorithm S: each index kept with probability needed/remaining.
  std::uint32_t needed = k;
  for (std::uint32_t i = 0; i < n && needed > 0; ++i) {
    if (below(n - i) < needed) {
      out.push_back(i);
      --needed;
    }
  }
  return out;
}

std::size_t Rng::weighted(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("weighted: no positive weight");
  double target = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0.0) return i;
  }
  // Rounding left a sliver; return the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace whinpjf
