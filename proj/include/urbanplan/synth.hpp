#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "urbanplan/spatial_graph.hpp"
#include "urbanplan/tensor.hpp"

namespace urban {

struct PoiEvent {
  int row = 0;
  int col = 0;
  int category = 0;
};

struct CitySample {
  std::uint64_t index = 0;
  Tensor configuration;  // {N,N,C} nonnegative integer counts
  std::vector<std::vector<double>> context_features;  // 8 regions x 4 features
  std::vector<std::vector<int>> trajectories;         // grid-index sequences
  double green_rate = 0.0;
  int instruction = 0;  // 0..4
  bool test_split = false;
};

struct Dataset {
  int n = 0;
  int c = 0;
  int m = 0;
  std::uint64_t seed = 0;
  std::array<double, 4> bin_edges{};
  std::vector<int> planted_zones;  // N*N archetype layout used by the generator
  std::vector<CitySample> samples;

  std::size_t train_count() const;
};

struct SynthOptions {
  int n = 10;
  int m = 4;
  std::uint64_t sample_count = 500;
  std::uint64_t seed = 7;
  int trajectory_count = 12;
  int trajectory_length = 24;
  double events_per_cell = 30.0;
};

// Deterministic function of the options; every sample draws from its own
// substream so generation order never matters.
Dataset generate_dataset(const SynthOptions& opts);

// Green-rate bin index over 4 strictly increasing interior edges; the top
// bin is right-closed. Rates outside [0,1] are rejected.
int derive_instruction(double green_rate, const std::array<double, 4>& edges);

Tensor build_configuration(const std::vector<PoiEvent>& events, int n, int c);

// Visit sequences over the N*N grid; each visit lands on a cell with
// probability proportional to that cell's POI mass plus smoothing.
std::vector<std::vector<int>> simulate_trajectories(const Tensor& configuration,
                                                    int count, int length,
                                                    std::uint64_t seed,
                                                    double smoothing = 1.0);

SpatialAttributedGraph build_context_graph(const CitySample& sample);

// Manhattan-Voronoi partition of the N*N grid into m archetype regions.
std::vector<int> make_zone_layout(int n, int m, std::uint64_t seed);

// Category mixture of archetype `zone` at greenness `gamma` in [0,1].
std::vector<double> archetype_mixture(int zone, double gamma);

// Share of green-category mass in a configuration (0 when empty).
double green_category_share(const Tensor& configuration);

}  // namespace urban
