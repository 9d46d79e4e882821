#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urbanplan/config.hpp"
#include "urbanplan/context_encoder.hpp"
#include "urbanplan/grid_generator.hpp"
#include "urbanplan/metrics.hpp"
#include "urbanplan/synth.hpp"
#include "urbanplan/topic_zones.hpp"
#include "urbanplan/zone_gan.hpp"

namespace urban {

// All trainable stages plus the configuration that fixes their shapes.
struct PlannerModel {
  RunConfig config;
  GraphEncoderParams encoder;
  AugmentorParams augmentor;
  ZoneGanParams zone_gan;
  GridGenParams grid;
  bool trained = false;

  static PlannerModel init(const RunConfig& cfg);
  std::vector<Parameter*> all_params();
  void save(const std::string& path) const;
  // Shapes come from `config`; a checkpoint lacking a stage raises
  // RuntimeFailure naming that stage.
  void load(const std::string& path);
};

// Fits the topic model on the whole corpus and labels every area.
std::vector<ZonePlan> discover_zones(const Dataset& dataset, const RunConfig& cfg);

// z for one sample: graph embedding fused with the instruction one-hot,
// ablation zeroing applied, right-padded to the attention-friendly width.
Tensor model_condition(const PlannerModel& model,
                       const SpatialAttributedGraph& graph, int instruction);

struct TrainArtifacts {
  EncoderTrainResult encoder;
  GanTrainLog gan;
  GridTrainResult grid;
};

// Encoder pretrain -> zone GAN -> grid stage, all on the train split, with
// real zone plans as grid-stage targets (teacher forcing).
TrainArtifacts train_planner(PlannerModel& model, const Dataset& dataset,
                             const std::vector<ZonePlan>& zone_plans);

struct GeneratedPlan {
  ZonePlan zones;
  Tensor raw;      // {N,N,C}, unclamped planning output
  Tensor clamped;  // negatives floored at zero
};

GeneratedPlan generate_plan(const PlannerModel& model, int instruction,
                            const SpatialAttributedGraph& graph,
                            std::uint64_t seed);

// Generates `repeats` plans per test sample under its own instruction and
// context, then compares group distributions against the test originals.
GroupReport evaluate_model(const PlannerModel& model, const Dataset& dataset,
                           int repeats, std::uint64_t eval_seed);

void save_gan_log_csv(const GanTrainLog& log, const std::string& path);

}  // namespace urban
