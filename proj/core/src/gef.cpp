#include "gef/framework/gef.hpp"

#include <cmath>
#include <string>

namespace gef {

double extract_gold_prob(std::span<const double> probabilities, int y_true) {
  if (y_true < 0 || static_cast<std::size_t>(y_true) >= probabilities.size())
    throw IndexError("class " + std::to_string(y_true) + " out of range for " +
                     std::to_string(probabilities.size()) + " classes");
  return probabilities[static_cast<std::size_t>(y_true)];
}

double explanation_factor(const ProbTriple& t) {
  return std::abs(t.p_classified - t.p_gold) + std::abs(t.p_classified - t.p_pred);
}

double mrt_loss(std::span<const double> losses, std::span<const double> factors) {
  if (losses.size() != factors.size())
    throw DimensionError("mrt_loss: loss and factor counts differ");
  if (losses.empty()) throw ContractError("mrt_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += losses[i] * factors[i];
  return total / static_cast<double>(losses.size());
}

double final_loss(double loss, double mrt, const LossWeights& weights) {
  return weights.loss * loss + weights.mrt * mrt;
}

Tensor extract_gold_prob(const Tensor& probabilities, std::span<const int> labels) {
  return pick(probabilities, labels);
}

Tensor explanation_factor(const Tensor& p_pred, const Tensor& p_classified, const Tensor& p_gold) {
  return add(abs(sub(p_classified, p_gold)), abs(sub(p_classified, p_pred)));
}

Tensor mrt_loss(const Tensor& losses, const Tensor& factors) {
  return mean(mul(losses, factors));
}

Tensor final_loss(const Tensor& loss, const Tensor& mrt, const LossWeights& weights) {
  return add(scale(loss, weights.loss), scale(mrt, weights.mrt));
}

}  // namespace gef
