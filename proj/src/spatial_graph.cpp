#include "urbanplan/spatial_graph.hpp"

#include <stdexcept>

namespace urban {

SpatialAttributedGraph build_context_graph(
    const std::vector<std::vector<double>>& context_features) {
  if (context_features.size() != 8) {
    throw std::invalid_argument("build_context_graph: expected 8 ring contexts");
  }
  const std::size_t d = context_features[0].size();
  for (const auto& f : context_features) {
    if (f.size() != d) {
      throw std::invalid_argument("build_context_graph: ragged feature vectors");
    }
  }

  // 3x3 layout positions; the target sits in the middle, contexts fill the
  // ring in row-major order.
  const int ring[8][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 0},
                          {1, 2}, {2, 0}, {2, 1}, {2, 2}};
  int pos[9][2];
  pos[0][0] = 1;
  pos[0][1] = 1;
  for (int r = 0; r < 8; ++r) {
    pos[r + 1][0] = ring[r][0];
    pos[r + 1][1] = ring[r][1];
  }

  SpatialAttributedGraph g;
  g.adjacency = Tensor({9, 9});
  for (int i = 0; i < 9; ++i) {
    g.adjacency.at(i, i) = 1.0;
    for (int j = i + 1; j < 9; ++j) {
      const int dr = pos[i][0] - pos[j][0];
      const int dc = pos[i][1] - pos[j][1];
      if (dr >= -1 && dr <= 1 && dc >= -1 && dc <= 1) {
        g.adjacency.at(i, j) = 1.0;
        g.adjacency.at(j, i) = 1.0;
      }
    }
  }

  g.features = Tensor({9, d});
  for (int r = 0; r < 8; ++r) {
    for (std::size_t k = 0; k < d; ++k) {
      g.features.at(r + 1, k) = context_features[r][k];
    }
  }
  return g;
}

}  // namespace urban
