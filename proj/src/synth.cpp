#include "urbanplan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "urbanplan/poi.hpp"
#include "urbanplan/rng.hpp"

namespace urban {

namespace {

constexpr std::uint64_t kLayoutStream = 0x4c41594f5554ull;
constexpr std::uint64_t kSampleStream = 0x53414d504c45ull;
constexpr std::uint64_t kSplitStream = 0x53504c4954ull;
constexpr std::uint64_t kTrajStream = 0x5452414aull;

// Base category weights for the four named archetypes: residential,
// business, recreation, transport. Higher m cycles with perturbation.
constexpr double kArchetypeBase[4][kPoiCategoryCount] = {
    {0.50, 0.20, 0.15, 0.05, 0.80, 0.90, 0.90, 0.35, 0.50, 0.15,
     0.15, 1.20, 0.15, 0.80, 0.40, 0.15, 0.20, 0.20, 0.30, 0.60},
    {0.70, 0.30, 0.15, 0.05, 0.90, 0.70, 0.50, 0.30, 0.25, 0.50,
     0.10, 0.50, 0.60, 0.25, 0.60, 1.10, 1.30, 0.25, 0.30, 0.45},
    {0.40, 0.15, 0.10, 0.05, 0.90, 0.50, 0.40, 1.20, 0.20, 0.70,
     1.30, 0.25, 0.10, 0.15, 0.35, 0.10, 0.15, 0.20, 0.25, 0.30},
    {1.20, 0.70, 0.50, 0.30, 0.50, 0.40, 0.35, 0.15, 0.20, 0.30,
     0.10, 0.30, 0.20, 0.20, 1.40, 0.20, 0.35, 0.70, 0.40, 0.35},
};

int sample_categorical(Rng& rng, const std::vector<double>& weights,
                       double total) {
  double r = rng.uniform01() * total;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    r -= weights[i];
    if (r < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

double config_total(const Tensor& configuration) {
  double total = 0.0;
  for (double v : configuration.values()) total += v;
  return total;
}

double category_mass(const Tensor& configuration, int category) {
  const std::size_t n = configuration.dim(0);
  const std::size_t c = configuration.dim(2);
  double mass = 0.0;
  const double* p = configuration.data();
  for (std::size_t cell = 0; cell < n * n; ++cell) {
    mass += p[cell * c + static_cast<std::size_t>(category)];
  }
  return mass;
}

CitySample make_sample(std::uint64_t sample_seed, std::uint64_t index,
                       const std::vector<int>& layout,
                       const SynthOptions& opts) {
  Rng rng(sample_seed);
  const int n = opts.n;
  const int m = opts.m;
  const int c = kPoiCategoryCount;

  CitySample s;
  s.index = index;
  const double gamma = rng.uniform01();

  // Per-sample zone intensities; the recreation-type archetype scales with
  // greenness so that instruction levels shift zone emphasis too.
  std::vector<double> zone_weight(m);
  double wsum = 0.0;
  for (int z = 0; z < m; ++z) {
    double w = std::exp(0.55 * rng.normal());
    if (z % 4 == 2) w *= 0.55 + 0.9 * gamma;
    zone_weight[z] = w;
    wsum += w;
  }
  for (double& w : zone_weight) w /= wsum;

  std::vector<std::vector<double>> mixture(m);
  std::vector<double> mixture_total(m);
  for (int z = 0; z < m; ++z) {
    mixture[z] = archetype_mixture(z, gamma);
    mixture_total[z] = 1.0;  // archetype_mixture is normalized
  }

  s.configuration = Tensor({static_cast<std::size_t>(n),
                            static_cast<std::size_t>(n),
                            static_cast<std::size_t>(c)});
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const int zone = layout[static_cast<std::size_t>(row * n + col)];
      const double rate = opts.events_per_cell * static_cast<double>(m) *
                          zone_weight[zone] * std::exp(0.20 * rng.normal());
      const long events = rng.poisson(rate);
      for (long e = 0; e < events; ++e) {
        const int cat = sample_categorical(rng, mixture[zone], mixture_total[zone]);
        s.configuration.at(static_cast<std::size_t>(row),
                           static_cast<std::size_t>(col),
                           static_cast<std::size_t>(cat)) += 1.0;
      }
    }
  }

  const double share = green_category_share(s.configuration);
  s.green_rate = std::clamp(share + 0.01 * rng.normal(), 0.0, 1.0);

  s.trajectories = simulate_trajectories(
      s.configuration, opts.trajectory_count, opts.trajectory_length,
      mix_seed(sample_seed, kTrajStream));

  // Context regions expose the sample's zone emphasis and density so that
  // geospatial contexts genuinely inform generation. Green-tilted categories
  // are kept out of the features: the instruction owns the green axis.
  const double total = std::max(config_total(s.configuration), 1.0);
  const double transport =
      (category_mass(s.configuration, 14) + category_mass(s.configuration, 0)) / total;
  const double social =
      (category_mass(s.configuration, 4) + category_mass(s.configuration, 5) +
       category_mass(s.configuration, 6)) / total;
  const double residential =
      (category_mass(s.configuration, 11) + category_mass(s.configuration, 13) +
       category_mass(s.configuration, 8)) / total;
  const double density =
      config_total(s.configuration) /
      (static_cast<double>(n) * static_cast<double>(n) * opts.events_per_cell);
  s.context_features.resize(8);
  for (int r = 0; r < 8; ++r) {
    s.context_features[r] = {
        3.0 * transport + 0.05 * rng.normal(),
        3.0 * social + 0.05 * rng.normal(),
        3.0 * residential + 0.05 * rng.normal(),
        density + 0.05 * rng.normal(),
    };
  }
  return s;
}

}  // namespace

std::size_t Dataset::train_count() const {
  return samples.size() - samples.size() / 10;
}

std::vector<double> archetype_mixture(int zone, double gamma) {
  if (zone < 0) throw std::invalid_argument("archetype_mixture: negative zone");
  std::vector<double> w(kArchetypeBase[zone % 4],
                        kArchetypeBase[zone % 4] + kPoiCategoryCount);
  if (zone >= 4) {
    // Keep extra archetypes distinct via a fixed per-zone perturbation.
    Rng rng(mix_seed(0x4152434845ull, static_cast<std::uint64_t>(zone)));
    for (double& v : w) v *= std::exp(0.35 * rng.normal());
  }
  const double green_mul = 0.35 + 2.30 * gamma;
  const double business_mul = 1.50 - 1.10 * gamma;
  for (int cat : kGreenCategories) w[static_cast<std::size_t>(cat)] *= green_mul;
  for (int cat : kBusinessCategories) w[static_cast<std::size_t>(cat)] *= business_mul;
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

std::vector<int> make_zone_layout(int n, int m, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("make_zone_layout: n < 2");
  if (m < 1 || m > n * n) throw std::invalid_argument("make_zone_layout: bad m");
  Rng rng(seed);
  std::vector<int> seeds;
  seeds.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n * n))));
  // Farthest-point placement keeps regions spread out.
  while (static_cast<int>(seeds.size()) < m) {
    int best = -1;
    int best_dist = -1;
    for (int cell = 0; cell < n * n; ++cell) {
      int nearest = std::numeric_limits<int>::max();
      for (int sc : seeds) {
        const int d = std::abs(cell / n - sc / n) + std::abs(cell % n - sc % n);
        nearest = std::min(nearest, d);
      }
      if (nearest > best_dist) {
        best_dist = nearest;
        best = cell;
      }
    }
    seeds.push_back(best);
  }
  std::vector<int> layout(static_cast<std::size_t>(n * n));
  for (int cell = 0; cell < n * n; ++cell) {
    int best_zone = 0;
    int best_dist = std::numeric_limits<int>::max();
    for (int z = 0; z < m; ++z) {
      const int d = std::abs(cell / n - seeds[z] / n) +
                    std::abs(cell % n - seeds[z] % n);
      if (d < best_dist) {
        best_dist = d;
        best_zone = z;
      }
    }
    layout[static_cast<std::size_t>(cell)] = best_zone;
  }
  return layout;
}

double green_category_share(const Tensor& configuration) {
  const double total = config_total(configuration);
  if (total <= 0.0) return 0.0;
  double green = 0.0;
  for (int cat : kGreenCategories) green += category_mass(configuration, cat);
  return green / total;
}

int derive_instruction(double green_rate, const std::array<double, 4>& edges) {
  if (!(green_rate >= 0.0 && green_rate <= 1.0)) {
    throw std::invalid_argument("derive_instruction: rate outside [0,1]");
  }
  for (int i = 0; i < 3; ++i) {
    if (!(edges[i] < edges[i + 1])) {
      throw std::invalid_argument("derive_instruction: edges not increasing");
    }
  }
  for (int level = 0; level < 4; ++level) {
    if (green_rate < edges[static_cast<std::size_t>(level)]) return level;
  }
  return 4;
}

Tensor build_configuration(const std::vector<PoiEvent>& events, int n, int c) {
  if (n < 1 || c < 1) throw std::invalid_argument("build_configuration: bad dims");
  Tensor t({static_cast<std::size_t>(n), static_cast<std::size_t>(n),
            static_cast<std::size_t>(c)});
  for (const PoiEvent& e : events) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n || e.category < 0 ||
        e.category >= c) {
      throw std::invalid_argument("build_configuration: event out of range");
    }
    t.at(static_cast<std::size_t>(e.row), static_cast<std::size_t>(e.col),
         static_cast<std::size_t>(e.category)) += 1.0;
  }
  return t;
}

std::vector<std::vector<int>> simulate_trajectories(const Tensor& configuration,
                                                    int count, int length,
                                                    std::uint64_t seed,
                                                    double smoothing) {
  if (count < 1 || length < 1) {
    throw std::invalid_argument("simulate_trajectories: count/length < 1");
  }
  const std::size_t n = configuration.dim(0);
  const std::size_t c = configuration.dim(2);
  const std::size_t cells = n * n;
  std::vector<double> weight(cells);
  double total = 0.0;
  const double* p = configuration.data();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double mass = 0.0;
    for (std::size_t k = 0; k < c; ++k) mass += p[cell * c + k];
    weight[cell] = mass + smoothing;
    total += weight[cell];
  }
  Rng rng(seed);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (auto& traj : out) {
    traj.resize(static_cast<std::size_t>(length));
    for (int& cell : traj) cell = sample_categorical(rng, weight, total);
  }
  return out;
}

SpatialAttributedGraph build_context_graph(const CitySample& sample) {
  return build_context_graph(sample.context_features);
}

Dataset generate_dataset(const SynthOptions& opts) {
  if (opts.n < 2 || opts.n > 256) {
    throw std::invalid_argument("generate_dataset: n outside [2,256]");
  }
  if (opts.m < 1 || opts.m > std::min(64, opts.n * opts.n)) {
    throw std::invalid_argument("generate_dataset: bad zone count");
  }
  if (opts.sample_count > 2000000ull) {
    throw std::invalid_argument("generate_dataset: sample count too large");
  }
  if (opts.trajectory_count < 1 || opts.trajectory_length < 1 ||
      opts.events_per_cell <= 0.0) {
    throw std::invalid_argument("generate_dataset: bad trajectory options");
  }

  Dataset ds;
  ds.n = opts.n;
  ds.c = kPoiCategoryCount;
  ds.m = opts.m;
  ds.seed = opts.seed;
  ds.planted_zones = make_zone_layout(opts.n, opts.m, mix_seed(opts.seed, kLayoutStream));

  const std::uint64_t sample_domain = mix_seed(opts.seed, kSampleStream);
  ds.samples.reserve(opts.sample_count);
  for (std::uint64_t i = 0; i < opts.sample_count; ++i) {
    ds.samples.push_back(
        make_sample(mix_seed(sample_domain, i), i, ds.planted_zones, opts));
  }

  if (opts.sample_count >= 5) {
    std::vector<double> rates;
    rates.reserve(ds.samples.size());
    for (const CitySample& s : ds.samples) rates.push_back(s.green_rate);
    std::sort(rates.begin(), rates.end());
    for (int j = 0; j < 4; ++j) {
      double e = rates[(static_cast<std::size_t>(j) + 1) * rates.size() / 5];
      if (j > 0 && e <= ds.bin_edges[static_cast<std::size_t>(j - 1)]) {
        e = ds.bin_edges[static_cast<std::size_t>(j - 1)] + 1e-12;
      }
      ds.bin_edges[static_cast<std::size_t>(j)] = e;
    }
  } else {
    ds.bin_edges = {0.2, 0.4, 0.6, 0.8};
  }
  for (CitySample& s : ds.samples) {
    s.instruction = derive_instruction(s.green_rate, ds.bin_edges);
  }

  if (!ds.samples.empty()) {
    std::vector<std::size_t> order(ds.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(mix_seed(opts.seed, kSplitStream));
    split_rng.shuffle(order);
    const std::size_t train = ds.train_count();
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      ds.samples[order[pos]].test_split = pos >= train;
    }
  }
  return ds;
}

}  // namespace urban
