#include "urbanplan/functionalizer.hpp"

#include <stdexcept>

namespace urban {

Tensor partition_zones(const ZonePlan& plan, int m) {
  const std::size_t n = static_cast<std::size_t>(plan.n);
  Tensor masks({static_cast<std::size_t>(m), n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int label = plan.labels[i * n + j];
      if (label < 0 || label >= m) {
        throw std::invalid_argument("partition_zones: label out of range");
      }
      masks.at(static_cast<std::size_t>(label), i, j) = 1.0;
    }
  }
  return masks;
}

Tensor avg_fusion(const Tensor& masks) {
  if (masks.rank() != 3) throw std::invalid_argument("avg_fusion: rank != 3");
  const std::size_t m = masks.dim(0), rows = masks.dim(1), cols = masks.dim(2);
  Tensor out({m, cols});
  for (std::size_t z = 0; z < m; ++z) {
    for (std::size_t j = 0; j < cols; ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < rows; ++i) total += masks.at(z, i, j);
      out.at(z, j) = total / static_cast<double>(rows);
    }
  }
  return out;
}

FunctionalityProjections project(const Tensor& masks, const Tensor& z,
                                 const Parameter& w_a) {
  const Tensor fused = avg_fusion(masks);
  Graph g;
  Var t = build_projections(g, fused, z.reshaped({1, z.size()}),
                            const_cast<Parameter&>(w_a), false);
  Tensor scores = matmul(fused, w_a.value);  // {M,1}
  FunctionalityProjections out;
  out.proportions = softmax_rows(scores.reshaped({1, scores.size()}))
                        .reshaped({scores.size(), 1});
  out.projections = t.value();
  return out;
}

Var build_projections(Graph& g, const Tensor& fused, const Tensor& z,
                      Parameter& w_a, bool trainable) {
  if (fused.rank() != 2 || z.rank() != 2 || z.rows() != 1) {
    throw std::invalid_argument("build_projections: bad shapes");
  }
  if (w_a.value.rank() != 2 || w_a.value.rows() != fused.cols() ||
      w_a.value.cols() != 1) {
    throw std::invalid_argument("build_projections: w_a must be {N,1}");
  }
  Var f = g.input(fused);
  Var wa = trainable ? g.param(w_a) : g.input(w_a.value);
  Var scores = matmul(f, wa);                          // {M,1}
  Var p = softmax_rows(transpose(scores));             // {1,M} softmax across zones
  return matmul(transpose(p), g.input(z));             // {M,1} x {1,O} -> {M,O}
}

}  // namespace urban
