#include "urbanplan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "urbanplan/rng.hpp"

namespace urban {

double max_relative_grad_error(const std::function<double()>& loss_value,
                               const std::function<void()>& accumulate_grads,
                               const std::vector<Parameter*>& params,
                               const GradCheckOptions& opt) {
  const double v1 = loss_value();
  const double v2 = loss_value();
  if (std::memcmp(&v1, &v2, sizeof(double)) != 0) {
    throw std::runtime_error("gradient check: loss is not deterministic");
  }

  for (Parameter* p : params) p->reset_grad();
  accumulate_grads();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  std::size_t total = 0;
  for (Parameter* p : params) total += p->value.size();
  if (total == 0) throw std::invalid_argument("gradient check: no coordinates");

  // Distinct coordinates via partial Fisher-Yates over the flat index space.
  std::vector<std::size_t> coords(total);
  for (std::size_t i = 0; i < total; ++i) coords[i] = i;
  Rng rng(mix_seed(opt.seed, 0x6672616463686bull));
  const std::size_t want =
      std::min<std::size_t>(total, static_cast<std::size_t>(opt.coordinate_samples));
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(coords[i], coords[j]);
  }

  double worst = 0.0;
  for (std::size_t idx = 0; idx < want; ++idx) {
    std::size_t flat = coords[idx];
    std::size_t pi = 0;
    while (flat >= params[pi]->value.size()) {
      flat -= params[pi]->value.size();
      ++pi;
    }
    double& slot = params[pi]->value.at(flat);
    const double original = slot;
    slot = original + opt.step;
    const double fp = loss_value();
    slot = original - opt.step;
    const double fm = loss_value();
    slot = original;
    const double numeric = (fp - fm) / (2.0 * opt.step);
    const double a = analytic[pi].at(flat);
    const double denom =
        std::max({std::abs(a), std::abs(numeric), opt.denom_floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace urban
