#include "urbanplan/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace urban {

void AdamOptimizer::step(const std::vector<Parameter*>& params) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (Parameter* p : params) {
    auto it = state_.find(p);
    if (it == state_.end()) {
      it = state_.emplace(p, Moments{Tensor::zeros(p->value.shape()),
                                     Tensor::zeros(p->value.shape())}).first;
    }
    Moments& mo = it->second;
    if (!mo.m.same_shape(p->value)) {
      throw std::logic_error("AdamOptimizer: parameter shape changed");
    }
    const std::size_t n = p->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = p->grad.at(i);
      mo.m.at(i) = cfg_.beta1 * mo.m.at(i) + (1.0 - cfg_.beta1) * g;
      mo.v.at(i) = cfg_.beta2 * mo.v.at(i) + (1.0 - cfg_.beta2) * g * g;
      const double mhat = mo.m.at(i) / bc1;
      const double vhat = mo.v.at(i) / bc2;
      p->value.at(i) -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace urban
