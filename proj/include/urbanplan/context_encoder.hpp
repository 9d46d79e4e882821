#pragma once

#include <cstdint>
#include <vector>

#include "urbanplan/autodiff.hpp"
#include "urbanplan/spatial_graph.hpp"

namespace urban {

// Two-layer graph convolution over the symmetrically normalized adjacency;
// the second layer carries mean and log-variance heads. Pretrained as a
// variational autoencoder on adjacency reconstruction, then frozen.
struct GraphEncoderParams {
  Parameter w0;        // {d, hidden}
  Parameter w_mu;      // {hidden, d_g}
  Parameter w_logvar;  // {hidden, d_g}

  static GraphEncoderParams init(int feature_dim, int hidden, int embed_dim,
                                 std::uint64_t seed);
  std::vector<Parameter*> params();
  std::vector<const Parameter*> params() const;
  int embed_dim() const { return static_cast<int>(w_mu.value.cols()); }
};

// D^{-1/2} (A) D^{-1/2}; adjacency must be symmetric with self-loops.
Tensor normalized_adjacency(const Tensor& adjacency);

struct GraphEncoding {
  Tensor node_mu;      // {n, d_g}
  Tensor node_logvar;  // {n, d_g}
  Tensor pooled;       // {1, d_g}, mean over node means
};

GraphEncoding encode_graph(const SpatialAttributedGraph& graph,
                           const GraphEncoderParams& params);

// Variational loss on one graph: adjacency reconstruction from inner
// products of reparameterized latents plus a standard-normal KL.
Var build_encoder_loss(Graph& g, const SpatialAttributedGraph& graph,
                       GraphEncoderParams& params, const Tensor& epsilon,
                       bool trainable);

// Reconstruction term alone, evaluated at the latent means.
double encoder_reconstruction_loss(const SpatialAttributedGraph& graph,
                                   const GraphEncoderParams& params);

struct EncoderTrainResult {
  double initial_loss = 0.0;  // total objective before training
  double final_loss = 0.0;
  double initial_reconstruction = 0.0;
  double final_reconstruction = 0.0;
};

EncoderTrainResult train_graph_encoder(
    const std::vector<SpatialAttributedGraph>& graphs,
    GraphEncoderParams& params, int epochs, double learning_rate,
    std::uint64_t seed, int batch_size = 64);

// z = [pooled || onehot5(level)], length d_g + 5.
Tensor fuse_condition(const Tensor& pooled, int level);

// Right-pads a row vector with zeros to `width`.
Tensor pad_condition(const Tensor& z, int width);

}  // namespace urban
