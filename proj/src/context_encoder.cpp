#include "urbanplan/context_encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "urbanplan/optimizer.hpp"
#include "urbanplan/poi.hpp"
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

struct EncoderHeads {
  Var mu, logvar;
};

EncoderHeads build_heads(Graph& g, const SpatialAttributedGraph& graph,
                         GraphEncoderParams& params, bool trainable) {
  const Tensor norm = normalized_adjacency(graph.adjacency);
  Var a = g.input(norm);
  Var x = g.input(graph.features);
  Var w0 = trainable ? g.param(params.w0) : g.input(params.w0.value);
  Var wm = trainable ? g.param(params.w_mu) : g.input(params.w_mu.value);
  Var wl = trainable ? g.param(params.w_logvar) : g.input(params.w_logvar.value);
  Var h = relu(matmul(matmul(a, x), w0));
  Var ah = matmul(a, h);
  return {matmul(ah, wm), matmul(ah, wl)};
}

}  // namespace

GraphEncoderParams GraphEncoderParams::init(int feature_dim, int hidden,
                                            int embed_dim, std::uint64_t seed) {
  GraphEncoderParams p;
  const double s0 = std::sqrt(2.0 / static_cast<double>(feature_dim));
  const double s1 = std::sqrt(1.0 / static_cast<double>(hidden));
  p.w0 = Parameter("encoder.w0",
                   gaussian_init({static_cast<std::size_t>(feature_dim),
                                  static_cast<std::size_t>(hidden)},
                                 s0, mix_seed(seed, 1)));
  p.w_mu = Parameter("encoder.w_mu",
                     gaussian_init({static_cast<std::size_t>(hidden),
                                    static_cast<std::size_t>(embed_dim)},
                                   s1, mix_seed(seed, 2)));
  p.w_logvar = Parameter("encoder.w_logvar",
                         gaussian_init({static_cast<std::size_t>(hidden),
                                        static_cast<std::size_t>(embed_dim)},
                                       s1, mix_seed(seed, 3)));
  return p;
}

std::vector<Parameter*> GraphEncoderParams::params() {
  return {&w0, &w_mu, &w_logvar};
}

std::vector<const Parameter*> GraphEncoderParams::params() const {
  return {&w0, &w_mu, &w_logvar};
}

Tensor normalized_adjacency(const Tensor& adjacency) {
  if (adjacency.rank() != 2 || adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("normalized_adjacency: not square");
  }
  const std::size_t n = adjacency.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency.at(i, i) != 1.0) {
      throw std::invalid_argument("normalized_adjacency: missing self-loop");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency.at(i, j) != adjacency.at(j, i)) {
        throw std::invalid_argument("normalized_adjacency: asymmetric adjacency");
      }
    }
  }
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += adjacency.at(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.at(i, j) = adjacency.at(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j];
    }
  }
  return out;
}

GraphEncoding encode_graph(const SpatialAttributedGraph& graph,
                           const GraphEncoderParams& params) {
  Graph g;
  auto heads = build_heads(g, graph, const_cast<GraphEncoderParams&>(params),
                           /*trainable=*/false);
  GraphEncoding out;
  out.node_mu = heads.mu.value();
  out.node_logvar = heads.logvar.value();
  out.pooled = mean_rows(heads.mu).value();
  return out;
}

Var build_encoder_loss(Graph& g, const SpatialAttributedGraph& graph,
                       GraphEncoderParams& params, const Tensor& epsilon,
                       bool trainable) {
  auto heads = build_heads(g, graph, params, trainable);
  if (!epsilon.same_shape(heads.mu.value())) {
    throw std::invalid_argument("build_encoder_loss: epsilon shape mismatch");
  }
  // z = mu + exp(logvar/2) * eps
  Var noise = g.input(epsilon);
  Var latent = add(heads.mu, mul(exp_elem(scale(heads.logvar, 0.5)), noise));
  Var scores = matmul(latent, transpose(latent));
  Var rec = bce_logits_sum(scores, graph.adjacency);
  // KL(N(mu, sigma^2) || N(0,1)), averaged per node as in standard practice.
  Var mu2 = mul(heads.mu, heads.mu);
  Var kl_terms = add_scalar(
      sub(add(mu2, exp_elem(heads.logvar)), heads.logvar), -1.0);
  Var kl = scale(sum_all(kl_terms), 0.5 / static_cast<double>(graph.adjacency.rows()));
  return add(rec, kl);
}

double encoder_reconstruction_loss(const SpatialAttributedGraph& graph,
                                   const GraphEncoderParams& params) {
  Graph g;
  auto heads = build_heads(g, graph, const_cast<GraphEncoderParams&>(params),
                           /*trainable=*/false);
  Var scores = matmul(heads.mu, transpose(heads.mu));
  return bce_logits_sum(scores, graph.adjacency).value().at(0);
}

EncoderTrainResult train_graph_encoder(
    const std::vector<SpatialAttributedGraph>& graphs,
    GraphEncoderParams& params, int epochs, double learning_rate,
    std::uint64_t seed, int batch_size) {
  if (graphs.empty()) throw std::invalid_argument("train_graph_encoder: no graphs");
  if (batch_size < 1) throw std::invalid_argument("train_graph_encoder: bad batch");

  const std::size_t n = graphs[0].adjacency.rows();
  const std::size_t d_g = params.w_mu.value.cols();

  auto epsilon_for = [&](std::uint64_t draw) {
    Rng rng(mix_seed(seed, 0xE500 + draw));
    Tensor eps({n, d_g});
    for (double& v : eps.values()) v = rng.normal();
    return eps;
  };

  auto total_loss = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      Graph g;
      total += build_encoder_loss(g, graphs[i], params, Tensor({n, d_g}), false)
                   .value()
                   .at(0);
    }
    return total;
  };
  auto total_rec = [&]() {
    double total = 0.0;
    for (const SpatialAttributedGraph& graph : graphs) {
      total += encoder_reconstruction_loss(graph, params);
    }
    return total;
  };

  EncoderTrainResult result;
  result.initial_loss = total_loss();
  result.initial_reconstruction = total_rec();

  AdamConfig cfg;
  cfg.learning_rate = learning_rate;
  AdamOptimizer opt(cfg);
  auto trainable = params.params();

  std::vector<std::size_t> order(graphs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(seed, 0x5348ull));
  std::uint64_t draw = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      for (Parameter* p : trainable) p->reset_grad();
      Graph g;
      Var loss{};
      bool first = true;
      for (std::size_t k = start; k < stop; ++k) {
        Var term = build_encoder_loss(g, graphs[order[k]], params,
                                      epsilon_for(draw++), true);
        loss = first ? term : add(loss, term);
        first = false;
      }
      if (!loss.value().all_finite()) {
        throw std::runtime_error("train_graph_encoder: non-finite loss");
      }
      g.backward(loss);
      opt.step(trainable);
    }
  }
  result.final_loss = total_loss();
  result.final_reconstruction = total_rec();
  return result;
}

Tensor fuse_condition(const Tensor& pooled, int level) {
  if (level < 0 || level >= kInstructionLevels) {
    throw std::invalid_argument("fuse_condition: level outside 0..4");
  }
  const std::size_t d_g = pooled.size();
  Tensor z({1, d_g + static_cast<std::size_t>(kInstructionLevels)});
  for (std::size_t i = 0; i < d_g; ++i) z.at(0, i) = pooled.at(i);
  z.at(0, d_g + static_cast<std::size_t>(level)) = 1.0;
  return z;
}

Tensor pad_condition(const Tensor& z, int width) {
  const std::size_t w = static_cast<std::size_t>(width);
  if (z.size() > w) throw std::invalid_argument("pad_condition: width too small");
  Tensor out({1, w});
  for (std::size_t i = 0; i < z.size(); ++i) out.at(0, i) = z.at(i);
  return out;
}

}  // namespace urban
