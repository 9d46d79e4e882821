#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "urbanplan/checkpoint.hpp"
#include "urbanplan/dataset_io.hpp"
#include "urbanplan/pipeline.hpp"
#include "urbanplan/plan_export.hpp"
#include "urbanplan/poi.hpp"

using namespace urban;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.n = 5;
  cfg.m = 2;
  cfg.k = 48;
  cfg.seed = 3;
  cfg.d_g = 8;
  cfg.gcn_hidden = 8;
  cfg.eta_dim = 6;
  cfg.gan_hidden = 32;
  cfg.heads = 2;
  cfg.encoder_epochs = 4;
  cfg.gan_epochs = 4;
  cfg.grid_epochs = 8;
  cfg.batch = 16;
  cfg.trajectory_count = 6;
  cfg.trajectory_length = 12;
  cfg.lda_iterations = 40;
  cfg.eval_repeats = 1;
  return cfg;
}

Dataset tiny_dataset(const RunConfig& cfg) {
  SynthOptions so;
  so.n = cfg.n;
  so.m = cfg.m;
  so.sample_count = cfg.k;
  so.seed = cfg.seed;
  so.trajectory_count = cfg.trajectory_count;
  so.trajectory_length = cfg.trajectory_length;
  so.events_per_cell = cfg.events_per_cell;
  return generate_dataset(so);
}

std::string file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("dataset io round-trips and is byte deterministic") {
  const RunConfig cfg = tiny_config();
  const Dataset ds = tiny_dataset(cfg);
  const std::string dir_a = "/tmp/urbanplan_test_ds_a";
  const std::string dir_b = "/tmp/urbanplan_test_ds_b";
  save_dataset(ds, dir_a);
  save_dataset(ds, dir_b);
  CHECK(file_bytes(dir_a + "/samples.jsonl") == file_bytes(dir_b + "/samples.jsonl"));
  CHECK(file_bytes(dir_a + "/manifest.json") == file_bytes(dir_b + "/manifest.json"));

  const Dataset back = load_dataset(dir_a);
  REQUIRE(back.samples.size() == ds.samples.size());
  CHECK(back.n == ds.n);
  CHECK(back.bin_edges == ds.bin_edges);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(back.samples[i].configuration.values() ==
          ds.samples[i].configuration.values());
    CHECK(back.samples[i].trajectories == ds.samples[i].trajectories);
    CHECK(back.samples[i].instruction == ds.samples[i].instruction);
    CHECK(back.samples[i].test_split == ds.samples[i].test_split);
  }
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

TEST_CASE("planner end-to-end: train, save, load, generate deterministically") {
  const RunConfig cfg = tiny_config();
  const Dataset ds = tiny_dataset(cfg);
  const auto zones = discover_zones(ds, cfg);
  REQUIRE(zones.size() == ds.samples.size());
  for (const ZonePlan& plan : zones) {
    for (int label : plan.labels) {
      CHECK(label >= 0);
      CHECK(label < cfg.m);
    }
  }

  PlannerModel model = PlannerModel::init(cfg);
  CHECK_THROWS_AS(
      generate_plan(model, 0, build_context_graph(ds.samples[0]), 1),
      RuntimeFailure);

  const TrainArtifacts art = train_planner(model, ds, zones);
  CHECK(art.grid.epoch_loss.back() < art.grid.initial_loss);

  const auto graph = build_context_graph(ds.samples[0]);
  const GeneratedPlan a = generate_plan(model, 3, graph, 17);
  const GeneratedPlan b = generate_plan(model, 3, graph, 17);
  CHECK(a.zones.labels == b.zones.labels);
  CHECK(a.raw.values() == b.raw.values());
  CHECK(a.raw.shape() == std::vector<std::size_t>{5, 5, 20});
  CHECK(a.zones.labels.size() == 25);
  for (double v : a.clamped.values()) CHECK(v >= 0.0);

  const GeneratedPlan c = generate_plan(model, 3, graph, 18);
  CHECK(a.zones.labels.size() == c.zones.labels.size());

  // Checkpoint round trip preserves every parameter bit.
  const std::string ckpt = "/tmp/urbanplan_test_model.ckpt";
  model.save(ckpt);
  PlannerModel loaded = PlannerModel::init(cfg);
  loaded.load(ckpt);
  CHECK(loaded.trained);
  const GeneratedPlan d = generate_plan(loaded, 3, graph, 17);
  CHECK(d.raw.values() == a.raw.values());

  const std::string ckpt2 = "/tmp/urbanplan_test_model2.ckpt";
  loaded.save(ckpt2);
  CHECK(file_bytes(ckpt) == file_bytes(ckpt2));

  // Evaluation runs over the test split and stays finite.
  const GroupReport report = evaluate_model(model, ds, 1, 5);
  CHECK(report.avg_kl >= 0.0);
  CHECK(std::isfinite(report.avg_kl));
  CHECK(std::isfinite(report.avg_cos));

  std::remove(ckpt.c_str());
  std::remove(ckpt2.c_str());
}

TEST_CASE("checkpoints missing a stage name the stage") {
  const RunConfig cfg = tiny_config();
  PlannerModel model = PlannerModel::init(cfg);
  // Save only the encoder parameters.
  std::vector<const Parameter*> partial;
  for (Parameter* p : model.encoder.params()) partial.push_back(p);
  const std::string path = "/tmp/urbanplan_test_partial.ckpt";
  save_checkpoint(path, partial);
  PlannerModel fresh = PlannerModel::init(cfg);
  try {
    fresh.load(path);
    FAIL("expected a missing-stage error");
  } catch (const RuntimeFailure& e) {
    const std::string what = e.what();
    CHECK(what.find("conditioning augmentation") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("instruction ablation makes levels indistinguishable") {
  RunConfig cfg = tiny_config();
  cfg.no_instruction = true;
  const Dataset ds = tiny_dataset(cfg);
  const auto zones = discover_zones(ds, cfg);
  PlannerModel model = PlannerModel::init(cfg);
  train_planner(model, ds, zones);
  const auto graph = build_context_graph(ds.samples[1]);
  const GeneratedPlan g0 = generate_plan(model, 0, graph, 99);
  const GeneratedPlan g4 = generate_plan(model, 4, graph, 99);
  CHECK(g0.raw.values() == g4.raw.values());
  CHECK(g0.zones.labels == g4.zones.labels);
}

TEST_CASE("context ablation zeroes the graph slice of the condition") {
  RunConfig cfg = tiny_config();
  cfg.no_context = true;
  PlannerModel model = PlannerModel::init(cfg);
  const Dataset ds = tiny_dataset(cfg);
  const Tensor z =
      model_condition(model, build_context_graph(ds.samples[0]), 2);
  for (int i = 0; i < cfg.d_g; ++i) CHECK(z.at(0, static_cast<std::size_t>(i)) == 0.0);
  CHECK(z.at(0, static_cast<std::size_t>(cfg.d_g + 2)) == 1.0);
  CHECK(z.cols() == static_cast<std::size_t>(cfg.padded_width()));
}

TEST_CASE("plan export round trip and rasters") {
  GeneratedPlan plan;
  plan.zones.n = 3;
  plan.zones.labels = {0, 1, 1, 0, 1, 0, 1, 0, 1};
  plan.raw = Tensor({3, 3, 2});
  plan.raw.at(0, 0, 0) = -1.5;
  plan.raw.at(1, 2, 1) = 4.25;
  plan.raw.at(2, 1, 0) = 0.125;
  plan.clamped = plan.raw;
  for (double& v : plan.clamped.values()) v = std::max(v, 0.0);

  const std::string path = "/tmp/urbanplan_test_plan.json";
  save_plan_json(plan, 2, 7, path);
  const GeneratedPlan back = load_plan_json(path);
  CHECK(back.zones.labels == plan.zones.labels);
  CHECK(back.raw.values() == plan.raw.values());
  CHECK(back.clamped.values() == plan.clamped.values());

  export_plan_csv(back, "/tmp/urbanplan_test_plan");
  export_plan_pgm(back, "/tmp/urbanplan_test_plan");
  const std::string pgm = file_bytes("/tmp/urbanplan_test_plan_cat00.pgm");
  CHECK(pgm.substr(0, 3) == "P5\n");
  CHECK(pgm.find("3 3\n255\n") != std::string::npos);
  // 9 payload bytes after the header.
  CHECK(pgm.size() == pgm.find("255\n") + 4 + 9);

  // All-zero configuration renders black.
  GeneratedPlan dark;
  dark.zones.n = 2;
  dark.zones.labels = {0, 0, 0, 0};
  dark.raw = Tensor({2, 2, 1});
  dark.clamped = dark.raw;
  export_plan_pgm(dark, "/tmp/urbanplan_test_dark");
  const std::string darkbytes = file_bytes("/tmp/urbanplan_test_dark_cat00.pgm");
  const std::string payload = darkbytes.substr(darkbytes.find("255\n") + 4);
  CHECK(payload.size() == 4);
  for (char b : payload) CHECK(b == 0);

  std::remove(path.c_str());
  for (int cat = 0; cat < 2; ++cat) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "/tmp/urbanplan_test_plan_cat%02d.csv", cat);
    std::remove(buf);
    std::snprintf(buf, sizeof(buf), "/tmp/urbanplan_test_plan_cat%02d.pgm", cat);
    std::remove(buf);
  }
  std::remove("/tmp/urbanplan_test_dark_cat00.pgm");
}
