#pragma once

#include <cstdint>
#include <vector>

#include "urbanplan/autodiff.hpp"

namespace urban {

// Grid-level stage: multi-head attention over the functionality projections,
// a residual feed-forward block, then bilinear planning layers emitting the
// N x N x C configuration. W_a (the functionalizer weight) trains here since
// it sits on this loss path.
//
// Head layout: by default each head projects to width O/h and W_T is {O,O};
// with `full_width` every head keeps width O and W_T is {h*O, O}.
struct GridGenParams {
  int n = 0, m = 0, width = 0, heads = 0, c = 0;
  bool full_width = false;
  std::vector<Parameter> w_q, w_k, w_v;  // per head
  Parameter w_t;    // {O,O} or {h*O, O}
  Parameter w1, w2; // {O,O}
  Parameter w_u;    // {N,M}
  Parameter w_d;    // {O, N*C}
  Parameter bias;   // {N, N*C}
  Parameter w_a;    // {N,1} functionalizer weight

  static GridGenParams init(int n, int m, int width, int heads, int c,
                            bool full_width, std::uint64_t seed);
  std::vector<Parameter*> params();
  std::vector<const Parameter*> params() const;
};

Var build_multi_head_attention(Graph& g, Var t, GridGenParams& params,
                               bool trainable);
Var build_ffn(Graph& g, Var t_prime, GridGenParams& params, bool trainable);
// {M,O} -> {N, N*C}; column index = col*C + category.
Var build_planning(Graph& g, Var t_hat, GridGenParams& params, bool trainable);

// Plain-tensor wrappers.
Tensor multi_head_attention(const Tensor& t, const GridGenParams& params);
// Per-head row-stochastic attention weight matrices {M,M}.
std::vector<Tensor> attention_weights(const Tensor& t, const GridGenParams& params);
Tensor ffn(const Tensor& t_prime, const GridGenParams& params);
Tensor planning_layers(const Tensor& t_hat, const GridGenParams& params); // {N,N,C}

// Sum of squared entrywise differences; shapes must match.
double reconstruction_loss(const Tensor& real, const Tensor& generated);

struct GridTrainOptions {
  int epochs = 60;
  int batch = 32;
  double learning_rate = 1e-3;
  bool no_attention = false;
  std::uint64_t seed = 1;
};

struct GridTrainResult {
  double initial_loss = 0.0;            // full train loss before any step
  std::vector<double> epoch_loss;       // running loss per epoch
};

// Builds the {M,O} projections for one sample inside `g` given the sample's
// constant avg_fusion matrix and condition row; shared with inference.
Var build_grid_output(Graph& g, const Tensor& fused, const Tensor& condition,
                      GridGenParams& params, bool no_attention, bool trainable);

// Teacher-forced training against real configurations. `fused[i]` is the
// avg_fusion matrix of sample i's real zone plan, `conditions[i]` its raw
// condition row, `targets[i]` the real configuration reshaped {N, N*C}.
GridTrainResult train_grid_stage(const std::vector<Tensor>& fused,
                                 const std::vector<Tensor>& conditions,
                                 const std::vector<Tensor>& targets,
                                 GridGenParams& params,
                                 const GridTrainOptions& opts);

}  // namespace urban
