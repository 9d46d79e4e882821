#pragma once

#include <cstdint>
#include <vector>

#include "urbanplan/autodiff.hpp"

namespace urban {

// Estimates a diagonal Gaussian over the condition embedding and samples
// augmented embeddings c = mu(z) + delta(z) * eps by reparameterization.
// delta stays positive because it is the exponential of half a log-variance.
struct AugmentorParams {
  int width = 0;
  int hidden = 0;  // 0 -> single linear layer per head
  Parameter w_h, b_h;
  Parameter w_mu, b_mu;
  Parameter w_logvar, b_logvar;

  static AugmentorParams init(int width, int hidden, std::uint64_t seed);
  std::vector<Parameter*> params();
  std::vector<const Parameter*> params() const;
};

struct AugmentorHeads {
  Var mu;      // same row count as z
  Var logvar;
};

// z is {B, width}; heads share the optional hidden layer.
AugmentorHeads build_augmentor_heads(Graph& g, Var z, AugmentorParams& params,
                                     bool trainable);

// c = mu(z) + exp(logvar(z)/2) * epsilon, rows independent.
Tensor augment(const Tensor& z, const Tensor& epsilon,
               const AugmentorParams& params);

// KL(N(mu(z), delta(z)^2) || N(0, I)) summed over rows of z.
double kl_penalty(const Tensor& z, const AugmentorParams& params);

// In-graph version of the penalty over a batch of conditions.
Var build_kl_penalty(Graph& g, const AugmentorHeads& heads);

}  // namespace urban
