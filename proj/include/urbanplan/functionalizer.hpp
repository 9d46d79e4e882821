#pragma once

#include "urbanplan/autodiff.hpp"
#include "urbanplan/topic_zones.hpp"

namespace urban {

// F_m[i,j] = 1 iff plan[i,j] = m. The masks partition the grid.
Tensor partition_zones(const ZonePlan& plan, int m);

// Mean along the first spatial axis: {M,N,N} -> {M,N}.
Tensor avg_fusion(const Tensor& masks);

struct FunctionalityProjections {
  Tensor proportions;  // {M, 1} softmax over zones
  Tensor projections;  // {M, O}, row m = p_m * z
};

// T = Softmax(avg_fusion(F) . W_a) . z with W_a of shape {N, 1}.
FunctionalityProjections project(const Tensor& masks, const Tensor& z,
                                 const Parameter& w_a);

// In-graph variant used by grid-stage training; `fused` is the precomputed
// avg_fusion matrix for one sample and `z` a {1, O} constant.
Var build_projections(Graph& g, const Tensor& fused, const Tensor& z,
                      Parameter& w_a, bool trainable);

}  // namespace urban
