#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "urbanplan/autodiff.hpp"

namespace urban {

struct GradCheckOptions {
  int coordinate_samples = 120;
  double step = 1e-5;
  double denom_floor = 1e-8;
  std::uint64_t seed = 0;
};

// Compares reverse-mode gradients against central finite differences on
// randomly sampled coordinates of `params` and returns the worst relative
// error, |analytic - numeric| / max(|analytic|, |numeric|, floor).
//
// `loss_value` evaluates the loss at the current parameter values with no
// side effects; `accumulate_grads` adds the loss gradient into each
// Parameter::grad. The loss must be deterministic: two evaluations that
// disagree bit-for-bit raise std::runtime_error.
double max_relative_grad_error(const std::function<double()>& loss_value,
                               const std::function<void()>& accumulate_grads,
                               const std::vector<Parameter*>& params,
                               const GradCheckOptions& opt = {});

}  // namespace urban
