#pragma once

#include <cstdint>
#include <vector>

#include "urbanplan/autodiff.hpp"
#include "urbanplan/condition_augmentor.hpp"
#include "urbanplan/topic_zones.hpp"

namespace urban {

// Conditional GAN over zone plans. The generator maps noise plus the
// augmented condition to a per-grid simplex over M labels; the discriminator
// scores (plan, condition) pairs in (0,1).
struct ZoneGanParams {
  int n = 0, m = 0, eta_dim = 0, cond_width = 0, hidden = 0;
  Parameter g_w1, g_b1, g_w2, g_b2, g_w3, g_b3;
  Parameter d_w1, d_b1, d_w2, d_b2, d_w3, d_b3;

  static ZoneGanParams init(int n, int m, int eta_dim, int cond_width,
                            int hidden, std::uint64_t seed);
  std::vector<Parameter*> generator_params();
  std::vector<Parameter*> discriminator_params();
  std::vector<Parameter*> params();
  int plan_width() const { return n * n * m; }
};

// eta_c is {B, eta_dim + cond_width}; output {B, N*N*M} with a softmax over
// each grid's M logits.
Var build_generator(Graph& g, Var eta_c, ZoneGanParams& params, bool trainable);

// plan_z is {B, N*N*M + cond_width}; output {B, 1} strictly inside (0,1).
Var build_discriminator(Graph& g, Var plan_z, ZoneGanParams& params,
                        bool trainable);

// Inference helpers.
Tensor generate_zones(const Tensor& eta, const Tensor& c,
                      const ZoneGanParams& params);  // {N,N,M} simplex
ZonePlan harden(const Tensor& soft_plan);            // per-grid argmax
Tensor one_hot_plan(const ZonePlan& plan, int m);    // {N,N,M}
double discriminate(const Tensor& plan, const Tensor& z,
                    const ZoneGanParams& params);

struct GanBatch {
  Tensor conditions;  // {B, cond_width} raw z rows
  Tensor eta;         // {B, eta_dim}
  Tensor epsilon;     // {B, cond_width} reparameterization noise
  Tensor real_plans;  // {B, N*N*M} one-hot rows (discriminator loss only)
};

// Generator objective: sum_k log(1 - D(G(eta,c), z)) plus
// lambda * sum_k KL; minimized. `non_saturating` swaps the first term for
// -log D(G). With `no_condaug` the condition feeds the generator unaugmented
// and the KL term vanishes.
Var build_generator_loss(Graph& g, const GanBatch& batch, ZoneGanParams& params,
                         AugmentorParams& augmentor, double lambda,
                         bool non_saturating, bool no_condaug, bool trainable);

// Discriminator objective: sum_k [log(1-D(fake,z)) + log D(real,z)];
// maximized by the caller. `fake_plans` are detached generator outputs.
Var build_discriminator_loss(Graph& g, const GanBatch& batch,
                             const Tensor& fake_plans, ZoneGanParams& params,
                             bool trainable);

struct GanStepLog {
  std::uint64_t step = 0;
  double loss_g = 0.0;
  double loss_d = 0.0;
  double kl = 0.0;
};

struct GanEpochDiag {
  double mean_real_score = 0.0;
  double mean_fake_score = 0.0;
  double label_distribution_kl = 0.0;
};

struct GanTrainOptions {
  int epochs = 30;
  int batch = 32;
  double learning_rate = 1e-3;
  double lambda = 1.0;
  bool non_saturating = false;
  bool no_condaug = false;
  std::uint64_t seed = 1;
};

struct GanTrainLog {
  std::vector<GanStepLog> steps;
  std::vector<GanEpochDiag> epochs;  // index 0 = before training
};

// One discriminator ascent step then one generator descent step per batch.
GanTrainLog train_zone_gan(const Tensor& conditions, const Tensor& real_plans,
                           ZoneGanParams& params, AugmentorParams& augmentor,
                           const GanTrainOptions& opts);

}  // namespace urban
