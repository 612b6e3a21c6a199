#pragma once

#include <span>
#include <vector>

#include "gef/tensor.hpp"

namespace gef {

/// Probabilities assigned to the ground-truth class by the predictor, by C on
/// the generated explanation and by C on the golden explanation.
struct ProbTriple {
  double p_pred = 0.0;
  double p_classified = 0.0;
  double p_gold = 0.0;
};

/// Weights on (L, L_MRT) in the final objective. (1, 0) is the plain joint loss.
struct LossWeights {
  double loss = 1.0;
  double mrt = 1.0;
};

/// P[y_true]. Throws IndexError when y_true is out of range.
double extract_gold_prob(std::span<const double> probabilities, int y_true);

/// |p_classified - p_gold| + |p_classified - p_pred|
double explanation_factor(const ProbTriple& t);

/// mean_i(L_i * EF_i)
double mrt_loss(std::span<const double> losses, std::span<const double> factors);

double final_loss(double loss, double mrt, const LossWeights& weights = {});

// ---- tensor forms ([b x 1] columns unless noted) ---------------------------

/// Column of probs[i, labels[i]].
Tensor extract_gold_prob(const Tensor& probabilities, std::span<const int> labels);

Tensor explanation_factor(const Tensor& p_pred, const Tensor& p_classified, const Tensor& p_gold);

/// Scalar mean of losses * factors.
Tensor mrt_loss(const Tensor& losses, const Tensor& factors);

/// Scalar weights.loss * loss + weights.mrt * mrt.
Tensor final_loss(const Tensor& loss, const Tensor& mrt, const LossWeights& weights = {});

}  // namespace gef
