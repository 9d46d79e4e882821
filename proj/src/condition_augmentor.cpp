#include "urbanplan/condition_augmentor.hpp"

#include <cmath>
#include <stdexcept>

#include "urbanplan/rng.hpp"
#include "urbanplan/tensor.hpp"

namespace urban {

namespace {

Tensor gaussian_init(std::vector<std::size_t> shape, double stddev,
                     std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = stddev * rng.normal();
  return t;
}

}  // namespace

AugmentorParams AugmentorParams::init(int width, int hidden, std::uint64_t seed) {
  if (width < 1) throw std::invalid_argument("AugmentorParams: width < 1");
  AugmentorParams p;
  p.width = width;
  p.hidden = hidden;
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t in = hidden > 0 ? static_cast<std::size_t>(hidden) : w;
  const double s_in = std::sqrt(1.0 / static_cast<double>(width));
  const double s_head = std::sqrt(1.0 / static_cast<double>(in));
  if (hidden > 0) {
    p.w_h = Parameter("augment.w_h",
                      gaussian_init({w, static_cast<std::size_t>(hidden)}, s_in,
                                    mix_seed(seed, 1)));
    p.b_h = Parameter("augment.b_h", Tensor({1, static_cast<std::size_t>(hidden)}));
  }
  p.w_mu = Parameter("augment.w_mu",
                     gaussian_init({in, w}, s_head, mix_seed(seed, 2)));
  p.b_mu = Parameter("augment.b_mu", Tensor({1, w}));
  p.w_logvar = Parameter("augment.w_logvar",
                         gaussian_init({in, w}, 0.1 * s_head, mix_seed(seed, 3)));
  p.b_logvar = Parameter("augment.b_logvar", Tensor({1, w}));
  return p;
}

std::vector<Parameter*> AugmentorParams::params() {
  std::vector<Parameter*> out;
  if (hidden > 0) {
    out.push_back(&w_h);
    out.push_back(&b_h);
  }
  out.push_back(&w_mu);
  out.push_back(&b_mu);
  out.push_back(&w_logvar);
  out.push_back(&b_logvar);
  return out;
}

std::vector<const Parameter*> AugmentorParams::params() const {
  auto mutable_list = const_cast<AugmentorParams*>(this)->params();
  return std::vector<const Parameter*>(mutable_list.begin(), mutable_list.end());
}

AugmentorHeads build_augmentor_heads(Graph& g, Var z, AugmentorParams& params,
                                     bool trainable) {
  auto bind = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  Var in = z;
  if (params.hidden > 0) {
    in = relu(add_rowvec(matmul(z, bind(params.w_h)), bind(params.b_h)));
  }
  Var mu = add_rowvec(matmul(in, bind(params.w_mu)), bind(params.b_mu));
  Var logvar = add_rowvec(matmul(in, bind(params.w_logvar)), bind(params.b_logvar));
  return {mu, logvar};
}

Tensor augment(const Tensor& z, const Tensor& epsilon,
               const AugmentorParams& params) {
  Graph g;
  auto heads = build_augmentor_heads(g, g.input(z),
                                     const_cast<AugmentorParams&>(params), false);
  const Tensor& mu = heads.mu.value();
  const Tensor& logvar = heads.logvar.value();
  if (!epsilon.same_shape(mu)) {
    throw std::invalid_argument("augment: epsilon shape mismatch");
  }
  Tensor c = mu;
  for (std::size_t i = 0; i < c.size(); ++i) {
    c.at(i) += std::exp(0.5 * logvar.at(i)) * epsilon.at(i);
  }
  return c;
}

double kl_penalty(const Tensor& z, const AugmentorParams& params) {
  Graph g;
  auto heads = build_augmentor_heads(g, g.input(z),
                                     const_cast<AugmentorParams&>(params), false);
  const Tensor& mu = heads.mu.value();
  const Tensor& logvar = heads.logvar.value();
  Tensor sigma = logvar;
  for (double& v : sigma.values()) v = std::exp(0.5 * v);
  return diag_gaussian_kl(mu, sigma);
}

Var build_kl_penalty(Graph& g, const AugmentorHeads& heads) {
  Var mu2 = mul(heads.mu, heads.mu);
  Var terms = add_scalar(
      sub(add(mu2, exp_elem(heads.logvar)), heads.logvar), -1.0);
  (void)g;
  return scale(sum_all(terms), 0.5);
}

}  // namespace urban
