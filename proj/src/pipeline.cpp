#include "urbanplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "urbanplan/checkpoint.hpp"
#include "urbanplan/functionalizer.hpp"
#include "urbanplan/poi.hpp"
#include "urbanplan/rng.hpp"

namespace urban {

namespace {

constexpr std::uint64_t kEncoderStage = 0x454e43ull;
constexpr std::uint64_t kGanStage = 0x47414eull;
constexpr std::uint64_t kGridStage = 0x475249ull;
constexpr std::uint64_t kInitStream = 0x494e4954ull;

Tensor normal_row(std::size_t width, Rng& rng) {
  Tensor t({1, width});
  for (double& v : t.values()) v = rng.normal();
  return t;
}

}  // namespace

PlannerModel PlannerModel::init(const RunConfig& cfg) {
  cfg.validate();
  PlannerModel model{
      cfg,
      GraphEncoderParams::init(4, cfg.gcn_hidden, cfg.d_g,
                               mix_seed(cfg.seed, mix_seed(kInitStream, 1))),
      AugmentorParams::init(cfg.padded_width(), cfg.condaug_hidden,
                            mix_seed(cfg.seed, mix_seed(kInitStream, 2))),
      ZoneGanParams::init(cfg.n, cfg.m, cfg.eta_dim, cfg.padded_width(),
                          cfg.gan_hidden,
                          mix_seed(cfg.seed, mix_seed(kInitStream, 3))),
      GridGenParams::init(cfg.n, cfg.m, cfg.padded_width(), cfg.heads, cfg.c,
                          cfg.attention_full_width,
                          mix_seed(cfg.seed, mix_seed(kInitStream, 4))),
      false};
  return model;
}

std::vector<Parameter*> PlannerModel::all_params() {
  std::vector<Parameter*> out;
  for (Parameter* p : encoder.params()) out.push_back(p);
  for (Parameter* p : augmentor.params()) out.push_back(p);
  for (Parameter* p : zone_gan.params()) out.push_back(p);
  for (Parameter* p : grid.params()) out.push_back(p);
  return out;
}

void PlannerModel::save(const std::string& path) const {
  Parameter marker("meta.trained", Tensor({1}, {trained ? 1.0 : 0.0}));
  std::vector<const Parameter*> params;
  for (Parameter* p : const_cast<PlannerModel*>(this)->all_params()) {
    params.push_back(p);
  }
  params.push_back(&marker);
  save_checkpoint(path, params);
}

void PlannerModel::load(const std::string& path) {
  struct Stage {
    const char* name;
    std::vector<Parameter*> params;
  };
  const Stage stages[] = {
      {"graph encoder", encoder.params()},
      {"conditioning augmentation", augmentor.params()},
      {"zone GAN", zone_gan.params()},
      {"grid generation", grid.params()},
  };
  for (const Stage& stage : stages) {
    try {
      load_checkpoint(path, stage.params);
    } catch (const std::runtime_error& e) {
      throw RuntimeFailure("checkpoint " + path + " is missing the " +
                           stage.name + " stage: " + e.what());
    }
  }
  Parameter marker("meta.trained", Tensor({1}));
  load_checkpoint(path, {&marker});
  trained = marker.value.at(0) != 0.0;
}

std::vector<ZonePlan> discover_zones(const Dataset& dataset, const RunConfig& cfg) {
  const Corpus corpus = corpus_from_dataset(dataset);
  TopicModelOptions opts;
  opts.topics = cfg.m;
  opts.alpha = cfg.effective_lda_alpha();
  opts.beta = cfg.lda_beta;
  opts.iterations = cfg.lda_iterations;
  opts.seed = mix_seed(cfg.seed, 0x4c4441ull);
  const TopicModel model = TopicModel::fit(corpus, opts);
  std::vector<ZonePlan> plans;
  plans.reserve(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    plans.push_back(model.zone_labels(i, dataset.n));
  }
  return plans;
}

Tensor model_condition(const PlannerModel& model,
                       const SpatialAttributedGraph& graph, int instruction) {
  const RunConfig& cfg = model.config;
  Tensor pooled = encode_graph(graph, model.encoder).pooled;  // {1, d_g}
  if (cfg.no_context) {
    pooled = Tensor({1, static_cast<std::size_t>(cfg.d_g)});
  }
  Tensor z = fuse_condition(pooled.reshaped({pooled.size()}), instruction);
  if (cfg.no_instruction) {
    for (int level = 0; level < kInstructionLevels; ++level) {
      z.at(0, static_cast<std::size_t>(cfg.d_g + level)) = 0.0;
    }
  }
  return pad_condition(z.reshaped({z.size()}), cfg.padded_width());
}

TrainArtifacts train_planner(PlannerModel& model, const Dataset& dataset,
                             const std::vector<ZonePlan>& zone_plans) {
  const RunConfig& cfg = model.config;
  if (zone_plans.size() != dataset.samples.size()) {
    throw ValidationError("train_planner: zone plans do not match dataset");
  }
  if (dataset.n != cfg.n || dataset.m != cfg.m || dataset.c != cfg.c) {
    throw ValidationError("train_planner: dataset dimensions do not match config");
  }

  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (!dataset.samples[i].test_split) train_idx.push_back(i);
  }
  if (train_idx.empty()) throw ValidationError("train_planner: empty train split");

  TrainArtifacts artifacts;

  // Stage 1: pretrain the graph encoder, then freeze it.
  std::vector<SpatialAttributedGraph> graphs;
  graphs.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    graphs.push_back(build_context_graph(dataset.samples[i]));
  }
  artifacts.encoder = train_graph_encoder(
      graphs, model.encoder, cfg.encoder_epochs, cfg.lr_encoder,
      mix_seed(cfg.seed, kEncoderStage), cfg.batch);

  // Conditions for the train split under the frozen encoder.
  std::vector<Tensor> conditions;
  conditions.reserve(train_idx.size());
  for (std::size_t k = 0; k < train_idx.size(); ++k) {
    const CitySample& s = dataset.samples[train_idx[k]];
    conditions.push_back(model_condition(model, graphs[k], s.instruction));
  }

  // Stage 2: zone-level GAN against one-hot real plans.
  const std::size_t plan_width = static_cast<std::size_t>(model.zone_gan.plan_width());
  Tensor cond_matrix({train_idx.size(), static_cast<std::size_t>(cfg.padded_width())});
  Tensor real_plans({train_idx.size(), plan_width});
  for (std::size_t k = 0; k < train_idx.size(); ++k) {
    for (std::size_t j = 0; j < cond_matrix.cols(); ++j) {
      cond_matrix.at(k, j) = conditions[k].at(0, j);
    }
    const Tensor onehot = one_hot_plan(zone_plans[train_idx[k]], cfg.m);
    for (std::size_t j = 0; j < plan_width; ++j) {
      real_plans.at(k, j) = onehot.at(j);
    }
  }
  GanTrainOptions gan_opts;
  gan_opts.epochs = cfg.gan_epochs;
  gan_opts.batch = cfg.batch;
  gan_opts.learning_rate = cfg.lr_gan;
  gan_opts.lambda = cfg.lambda;
  gan_opts.non_saturating = cfg.non_saturating;
  gan_opts.no_condaug = cfg.no_condaug;
  gan_opts.seed = mix_seed(cfg.seed, kGanStage);
  artifacts.gan = train_zone_gan(cond_matrix, real_plans, model.zone_gan,
                                 model.augmentor, gan_opts);

  // Stage 3: grid stage, teacher-forced on real zone plans.
  std::vector<Tensor> fused;
  std::vector<Tensor> targets;
  fused.reserve(train_idx.size());
  targets.reserve(train_idx.size());
  for (std::size_t k = 0; k < train_idx.size(); ++k) {
    const std::size_t i = train_idx[k];
    fused.push_back(avg_fusion(partition_zones(zone_plans[i], cfg.m)));
    targets.push_back(dataset.samples[i].configuration.reshaped(
        {static_cast<std::size_t>(cfg.n),
         static_cast<std::size_t>(cfg.n) * static_cast<std::size_t>(cfg.c)}));
  }
  GridTrainOptions grid_opts;
  grid_opts.epochs = cfg.grid_epochs;
  grid_opts.batch = cfg.batch;
  grid_opts.learning_rate = cfg.lr_grid;
  grid_opts.no_attention = cfg.no_attention;
  grid_opts.seed = mix_seed(cfg.seed, kGridStage);
  artifacts.grid =
      train_grid_stage(fused, conditions, targets, model.grid, grid_opts);

  model.trained = true;
  return artifacts;
}

GeneratedPlan generate_plan(const PlannerModel& model, int instruction,
                            const SpatialAttributedGraph& graph,
                            std::uint64_t seed) {
  if (!model.trained) {
    throw RuntimeFailure("generate_plan: model has not been trained");
  }
  const RunConfig& cfg = model.config;
  const Tensor z = model_condition(model, graph, instruction);

  // Independent substreams per noise consumer, so ablations that skip a
  // draw leave the other streams untouched.
  Rng eps_rng(mix_seed(seed, 0x455053ull));
  Rng eta_rng(mix_seed(seed, 0x455441ull));
  Tensor c = z;
  if (!cfg.no_condaug) {
    const Tensor epsilon = normal_row(z.cols(), eps_rng);
    c = augment(z, epsilon, model.augmentor);
  }
  const Tensor eta = normal_row(static_cast<std::size_t>(cfg.eta_dim), eta_rng);

  GeneratedPlan plan;
  const Tensor soft = generate_zones(eta.reshaped({eta.size()}),
                                     c.reshaped({c.size()}), model.zone_gan);
  plan.zones = harden(soft);

  const Tensor fused = avg_fusion(partition_zones(plan.zones, cfg.m));
  Graph g;
  Var out = build_grid_output(g, fused, z, const_cast<GridGenParams&>(model.grid),
                              cfg.no_attention, false);
  plan.raw = out.value().reshaped({static_cast<std::size_t>(cfg.n),
                                   static_cast<std::size_t>(cfg.n),
                                   static_cast<std::size_t>(cfg.c)});
  plan.clamped = plan.raw;
  for (double& v : plan.clamped.values()) v = std::max(v, 0.0);
  return plan;
}

GroupReport evaluate_model(const PlannerModel& model, const Dataset& dataset,
                           int repeats, std::uint64_t eval_seed) {
  if (repeats < 1) throw ValidationError("evaluate_model: repeats < 1");
  std::vector<std::vector<const Tensor*>> real_by_level(kInstructionLevels);
  std::vector<std::vector<Tensor>> generated_by_level(kInstructionLevels);
  for (const CitySample& s : dataset.samples) {
    if (!s.test_split) continue;
    real_by_level[static_cast<std::size_t>(s.instruction)].push_back(
        &s.configuration);
    const SpatialAttributedGraph graph = build_context_graph(s);
    for (int r = 0; r < repeats; ++r) {
      const std::uint64_t seed =
          mix_seed(eval_seed, s.index * 1000ull + static_cast<std::uint64_t>(r));
      generated_by_level[static_cast<std::size_t>(s.instruction)].push_back(
          generate_plan(model, s.instruction, graph, seed).clamped);
    }
  }
  std::vector<std::vector<const Tensor*>> generated_ptrs(kInstructionLevels);
  for (std::size_t level = 0; level < generated_by_level.size(); ++level) {
    for (const Tensor& t : generated_by_level[level]) {
      generated_ptrs[level].push_back(&t);
    }
  }
  return build_group_report(real_by_level, generated_ptrs);
}

void save_gan_log_csv(const GanTrainLog& log, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("gan log: cannot write " + path);
  os << "step,loss_g,loss_d,kl\n";
  os.precision(17);
  for (const GanStepLog& s : log.steps) {
    os << s.step << ',' << s.loss_g << ',' << s.loss_d << ',' << s.kl << '\n';
  }
}

}  // namespace urban
