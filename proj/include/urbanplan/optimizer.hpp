#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "urbanplan/autodiff.hpp"

namespace urban {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected adaptive-moment optimizer. Gradients are read, never
// modified; callers reset them between steps.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(const std::vector<Parameter*>& params);

  std::uint64_t step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    Tensor m, v;
  };

  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::unordered_map<const Parameter*, Moments> state_;
};

}  // namespace urban
