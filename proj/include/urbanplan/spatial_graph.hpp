#pragma once

#include <vector>

#include "urbanplan/tensor.hpp"

namespace urban {

// Target area plus its eight encircling context regions as an attributed
// graph. Node 0 is the (empty) target with zeroed features; nodes 1..8 are
// the ring contexts in row-major 3x3 order. Adjacency is the 8-connectivity
// of the 3x3 layout with self-loops.
struct SpatialAttributedGraph {
  Tensor adjacency;  // {n, n}, symmetric 0/1 with unit diagonal
  Tensor features;   // {n, d}
};

// `context_features` holds one feature vector per ring region (exactly 8).
SpatialAttributedGraph build_context_graph(
    const std::vector<std::vector<double>>& context_features);

}  // namespace urban
