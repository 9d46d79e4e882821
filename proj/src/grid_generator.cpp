#include "urbanplan/grid_generator.hpp"

#include <cmath>
#include <stdexcept>

#include "urbanplan/functionalizer.hpp"
#include "urbanplan/optimizer.hpp"
#include "urbanplan/rng.hpp"

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

GridGenParams GridGenParams::init(int n, int m, int width, int heads, int c,
                                  bool full_width, std::uint64_t seed) {
  if (n < 1 || m < 1 || width < 1 || heads < 1 || c < 1) {
    throw std::invalid_argument("GridGenParams: bad dimensions");
  }
  if (!full_width && width % heads != 0) {
    throw std::invalid_argument("GridGenParams: width not divisible by heads");
  }
  GridGenParams p;
  p.n = n;
  p.m = m;
  p.width = width;
  p.heads = heads;
  p.c = c;
  p.full_width = full_width;
  const std::size_t o = static_cast<std::size_t>(width);
  const std::size_t dh = full_width ? o : o / static_cast<std::size_t>(heads);
  const double s = std::sqrt(1.0 / static_cast<double>(width));
  for (int h = 0; h < heads; ++h) {
    const std::string tag = std::to_string(h);
    p.w_q.emplace_back("grid.attn.q" + tag,
                       gaussian_init({o, dh}, s, mix_seed(seed, 100 + h)));
    p.w_k.emplace_back("grid.attn.k" + tag,
                       gaussian_init({o, dh}, s, mix_seed(seed, 200 + h)));
    p.w_v.emplace_back("grid.attn.v" + tag,
                       gaussian_init({o, dh}, s, mix_seed(seed, 300 + h)));
  }
  const std::size_t concat_width = dh * static_cast<std::size_t>(heads);
  p.w_t = Parameter("grid.attn.w_t",
                    gaussian_init({concat_width, o}, s, mix_seed(seed, 400)));
  p.w1 = Parameter("grid.ffn.w1", gaussian_init({o, o}, s, mix_seed(seed, 500)));
  p.w2 = Parameter("grid.ffn.w2", gaussian_init({o, o}, s, mix_seed(seed, 600)));
  p.w_u = Parameter("grid.plan.w_u",
                    gaussian_init({static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(m)},
                                  std::sqrt(1.0 / static_cast<double>(m)),
                                  mix_seed(seed, 700)));
  p.w_d = Parameter("grid.plan.w_d",
                    gaussian_init({o, static_cast<std::size_t>(n) *
                                          static_cast<std::size_t>(c)},
                                  s, mix_seed(seed, 800)));
  p.bias = Parameter("grid.plan.b",
                     Tensor({static_cast<std::size_t>(n),
                             static_cast<std::size_t>(n) *
                                 static_cast<std::size_t>(c)}));
  p.w_a = Parameter("functionalizer.w_a",
                    Tensor({static_cast<std::size_t>(n), 1}));
  return p;
}

std::vector<Parameter*> GridGenParams::params() {
  std::vector<Parameter*> out;
  for (auto& q : w_q) out.push_back(&q);
  for (auto& k : w_k) out.push_back(&k);
  for (auto& v : w_v) out.push_back(&v);
  out.push_back(&w_t);
  out.push_back(&w1);
  out.push_back(&w2);
  out.push_back(&w_u);
  out.push_back(&w_d);
  out.push_back(&bias);
  out.push_back(&w_a);
  return out;
}

std::vector<const Parameter*> GridGenParams::params() const {
  auto mutable_list = const_cast<GridGenParams*>(this)->params();
  return std::vector<const Parameter*>(mutable_list.begin(), mutable_list.end());
}

Var build_multi_head_attention(Graph& g, Var t, GridGenParams& params,
                               bool trainable) {
  auto bind = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  if (t.value().cols() != static_cast<std::size_t>(params.width)) {
    throw std::invalid_argument("attention: projection width mismatch");
  }
  const std::size_t dh = params.full_width
                             ? static_cast<std::size_t>(params.width)
                             : static_cast<std::size_t>(params.width) /
                                   static_cast<std::size_t>(params.heads);
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(params.heads));
  for (int h = 0; h < params.heads; ++h) {
    Var q = matmul(t, bind(params.w_q[static_cast<std::size_t>(h)]));
    Var k = matmul(t, bind(params.w_k[static_cast<std::size_t>(h)]));
    Var v = matmul(t, bind(params.w_v[static_cast<std::size_t>(h)]));
    Var weights = softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt_dk));
    head_outputs.push_back(matmul(weights, v));
  }
  Var joined = head_outputs.size() == 1 ? head_outputs[0]
                                        : concat_cols(head_outputs);
  return add(t, matmul(joined, bind(params.w_t)));
}

Var build_ffn(Graph& g, Var t_prime, GridGenParams& params, bool trainable) {
  auto bind = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  return add(t_prime,
             matmul(relu(matmul(t_prime, bind(params.w1))), bind(params.w2)));
}

Var build_planning(Graph& g, Var t_hat, GridGenParams& params, bool trainable) {
  auto bind = [&](Parameter& p) {
    return trainable ? g.param(p) : g.input(p.value);
  };
  return add(matmul(matmul(bind(params.w_u), t_hat), bind(params.w_d)),
             bind(params.bias));
}

Tensor multi_head_attention(const Tensor& t, const GridGenParams& params) {
  Graph g;
  return build_multi_head_attention(g, g.input(t),
                                    const_cast<GridGenParams&>(params), false)
      .value();
}

std::vector<Tensor> attention_weights(const Tensor& t,
                                      const GridGenParams& params) {
  const std::size_t dh = params.full_width
                             ? static_cast<std::size_t>(params.width)
                             : static_cast<std::size_t>(params.width) /
                                   static_cast<std::size_t>(params.heads);
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> out;
  for (int h = 0; h < params.heads; ++h) {
    const Tensor q = matmul(t, params.w_q[static_cast<std::size_t>(h)].value);
    const Tensor k = matmul(t, params.w_k[static_cast<std::size_t>(h)].value);
    Tensor scores({q.rows(), k.rows()});
    matmul_nt_acc(q, k, scores);
    for (double& v : scores.values()) v *= inv_sqrt_dk;
    out.push_back(softmax_rows(scores));
  }
  return out;
}

Tensor ffn(const Tensor& t_prime, const GridGenParams& params) {
  Graph g;
  return build_ffn(g, g.input(t_prime), const_cast<GridGenParams&>(params), false)
      .value();
}

Tensor planning_layers(const Tensor& t_hat, const GridGenParams& params) {
  Graph g;
  Tensor flat =
      build_planning(g, g.input(t_hat), const_cast<GridGenParams&>(params), false)
          .value();
  return flat.reshaped({static_cast<std::size_t>(params.n),
                        static_cast<std::size_t>(params.n),
                        static_cast<std::size_t>(params.c)});
}

double reconstruction_loss(const Tensor& real, const Tensor& generated) {
  if (!real.same_shape(generated)) {
    throw std::invalid_argument("reconstruction_loss: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const double d = real.at(i) - generated.at(i);
    total += d * d;
  }
  return total;
}

Var build_grid_output(Graph& g, const Tensor& fused, const Tensor& condition,
                      GridGenParams& params, bool no_attention, bool trainable) {
  Var t = build_projections(g, fused, condition, params.w_a, trainable);
  Var t_prime = no_attention
                    ? t
                    : build_multi_head_attention(g, t, params, trainable);
  Var t_hat = build_ffn(g, t_prime, params, trainable);
  return build_planning(g, t_hat, params, trainable);
}

GridTrainResult train_grid_stage(const std::vector<Tensor>& fused,
                                 const std::vector<Tensor>& conditions,
                                 const std::vector<Tensor>& targets,
                                 GridGenParams& params,
                                 const GridTrainOptions& opts) {
  const std::size_t count = fused.size();
  if (count == 0 || conditions.size() != count || targets.size() != count) {
    throw std::invalid_argument("train_grid_stage: mismatched inputs");
  }

  auto sample_loss = [&](std::size_t i) {
    Graph g;
    Var out = build_grid_output(g, fused[i], conditions[i], params,
                                opts.no_attention, false);
    return reconstruction_loss(targets[i], out.value());
  };
  auto full_loss = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) total += sample_loss(i);
    return total;
  };

  GridTrainResult result;
  result.initial_loss = full_loss();

  AdamConfig cfg;
  cfg.learning_rate = opts.learning_rate;
  AdamOptimizer opt(cfg);
  auto trainable = params.params();

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(opts.seed, 0x47524944ull));
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    double running = 0.0;
    for (std::size_t start = 0; start < count;
         start += static_cast<std::size_t>(opts.batch)) {
      const std::size_t stop =
          std::min(count, start + static_cast<std::size_t>(opts.batch));
      for (Parameter* p : trainable) p->reset_grad();
      Graph g;
      // Stack per-sample planning outputs so the widest matmul runs once.
      std::vector<Var> outs;
      std::vector<Var> diffs;
      outs.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        Var out = build_grid_output(g, fused[i], conditions[i], params,
                                    opts.no_attention, true);
        diffs.push_back(sub(g.input(targets[i]), out));
      }
      Var stacked = diffs.size() == 1 ? diffs[0] : concat_rows(diffs);
      Var loss = sum_all(mul(stacked, stacked));
      const double loss_value = loss.value().at(0);
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("train_grid_stage: non-finite loss");
      }
      running += loss_value;
      g.backward(loss);
      opt.step(trainable);
    }
    result.epoch_loss.push_back(running);
  }
  return result;
}

}  // namespace urban
