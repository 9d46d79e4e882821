#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "urbanplan/config.hpp"
#include "urbanplan/dataset_io.hpp"
#include "urbanplan/pipeline.hpp"
#include "urbanplan/plan_export.hpp"
#include "urbanplan/poi.hpp"

namespace {

namespace fs = std::filesystem;
using urban::RunConfig;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--set", opts.overrides,
                  "override a config entry as key=value (repeatable)");
}

std::string resolve_path(const std::string& flag_value,
                         const std::string& config_value, const char* what) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  throw urban::UsageError(std::string("missing ") + what +
                          " (pass the flag or set it in the config)");
}

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = RunConfig::from_file(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw urban::UsageError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void require_absent_or_force(const fs::path& marker, bool force) {
  if (!force && fs::exists(marker)) {
    throw urban::ValidationError("output " + marker.string() +
                                 " exists; pass --force to overwrite");
  }
}

urban::SynthOptions synth_options(const RunConfig& cfg) {
  urban::SynthOptions so;
  so.n = cfg.n;
  so.m = cfg.m;
  so.sample_count = cfg.k;
  so.seed = cfg.seed;
  so.trajectory_count = cfg.trajectory_count;
  so.trajectory_length = cfg.trajectory_length;
  so.events_per_cell = cfg.events_per_cell;
  return so;
}

std::string zone_file(const fs::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "u_%05zu.csv", index);
  return (dir / name).string();
}

std::vector<urban::ZonePlan> load_zone_dir(const fs::path& data_dir,
                                           const urban::Dataset& dataset) {
  const fs::path dir = data_dir / "zones";
  if (!fs::exists(dir / "meta.json")) {
    throw urban::RuntimeFailure("zone plans missing; run `urbanplan zones` first");
  }
  std::vector<urban::ZonePlan> plans;
  plans.reserve(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    plans.push_back(urban::load_zone_plan_csv(zone_file(dir, i), dataset.n));
  }
  return plans;
}

int cmd_synth(const CommonOpts& common, const std::string& out_flag, bool force) {
  const RunConfig cfg = resolve_config(common);
  const std::string out = resolve_path(out_flag, cfg.out_dir, "--out");
  require_absent_or_force(fs::path(out) / "manifest.json", force);
  urban::SynthOptions so = synth_options(cfg);
  urban::Dataset ds = urban::generate_dataset(so);
  if (cfg.has_fixed_bin_edges()) {
    ds.bin_edges = cfg.fixed_bin_edges();
    for (urban::CitySample& s : ds.samples) {
      s.instruction = urban::derive_instruction(s.green_rate, ds.bin_edges);
    }
  }
  urban::save_dataset(ds, out);
  std::cout << "wrote " << ds.samples.size() << " samples to " << out << "\n";
  return 0;
}

int cmd_zones(const CommonOpts& common, const std::string& data_flag, bool force) {
  const RunConfig cfg = resolve_config(common);
  const std::string data = resolve_path(data_flag, cfg.data_dir, "--data");
  const urban::Dataset ds = urban::load_dataset(data);
  const fs::path dir = fs::path(data) / "zones";
  require_absent_or_force(dir / "meta.json", force);
  fs::create_directories(dir);
  const auto plans = urban::discover_zones(ds, cfg);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    urban::save_zone_plan_csv(plans[i], zone_file(dir, i));
  }
  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["m"] = cfg.m;
  meta["alpha"] = cfg.effective_lda_alpha();
  meta["beta"] = cfg.lda_beta;
  meta["iterations"] = cfg.lda_iterations;
  meta["count"] = plans.size();
  std::ofstream os(dir / "meta.json");
  os << meta.dump(2) << '\n';
  std::cout << "wrote " << plans.size() << " zone rasters to " << dir.string()
            << "\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& data_flag,
              const std::string& out_flag, bool force) {
  const RunConfig cfg = resolve_config(common);
  const std::string data = resolve_path(data_flag, cfg.data_dir, "--data");
  const std::string out = resolve_path(out_flag, cfg.out_dir, "--out");
  const urban::Dataset ds = urban::load_dataset(data);
  const fs::path out_dir(out);
  require_absent_or_force(out_dir / "model.ckpt", force);
  fs::create_directories(out_dir);
  const auto zones = load_zone_dir(data, ds);

  urban::PlannerModel model = urban::PlannerModel::init(cfg);
  const urban::TrainArtifacts artifacts = urban::train_planner(model, ds, zones);
  model.save((out_dir / "model.ckpt").string());
  urban::save_gan_log_csv(artifacts.gan, (out_dir / "gan_loss.csv").string());

  nlohmann::json summary;
  summary["encoder_initial_loss"] = artifacts.encoder.initial_loss;
  summary["encoder_final_loss"] = artifacts.encoder.final_loss;
  summary["grid_initial_loss"] = artifacts.grid.initial_loss;
  summary["grid_epoch_loss"] = artifacts.grid.epoch_loss;
  std::ofstream os(out_dir / "train_summary.json");
  os << summary.dump(2) << '\n';
  std::cout << "trained model written to " << (out_dir / "model.ckpt").string()
            << "\n";
  return 0;
}

int cmd_generate(const CommonOpts& common, const std::string& data_flag,
                 const std::string& model_flag, int instruction,
                 std::size_t context, std::uint64_t seed,
                 const std::string& out) {
  const RunConfig cfg = resolve_config(common);
  const std::string data = resolve_path(data_flag, cfg.data_dir, "--data");
  const std::string model_path = resolve_path(model_flag, cfg.model_path, "--model");
  if (instruction < 0 || instruction >= urban::kInstructionLevels) {
    throw urban::ValidationError("--instruction must be in 0..4");
  }
  const urban::Dataset ds = urban::load_dataset(data);
  if (context >= ds.samples.size()) {
    throw urban::ValidationError("--context index outside dataset");
  }
  urban::PlannerModel model = urban::PlannerModel::init(cfg);
  model.load(model_path);
  const auto graph = urban::build_context_graph(ds.samples[context]);
  const urban::GeneratedPlan plan =
      urban::generate_plan(model, instruction, graph, seed);
  urban::save_plan_json(plan, instruction, seed, out);
  std::cout << "wrote plan to " << out << "\n";
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& data_flag,
             const std::string& model_flag, const std::string& out_prefix) {
  const RunConfig cfg = resolve_config(common);
  const std::string data = resolve_path(data_flag, cfg.data_dir, "--data");
  const std::string model_path = resolve_path(model_flag, cfg.model_path, "--model");
  const urban::Dataset ds = urban::load_dataset(data);
  urban::PlannerModel model = urban::PlannerModel::init(cfg);
  model.load(model_path);
  const urban::GroupReport report =
      urban::evaluate_model(model, ds, cfg.eval_repeats, cfg.eval_seed);
  urban::save_group_report_json(report, out_prefix + ".json");
  urban::save_group_report_csv(report, out_prefix + ".csv");
  std::cout << "avg_kl=" << report.avg_kl << " avg_js=" << report.avg_js
            << " avg_hd=" << report.avg_hd << " avg_cos=" << report.avg_cos
            << "\n";
  return 0;
}

int cmd_export(const std::string& in, const std::string& format,
               const std::string& out_prefix) {
  if (format != "csv" && format != "pgm" && format != "json") {
    throw urban::UsageError("unknown export format '" + format + "'");
  }
  const urban::GeneratedPlan plan = urban::load_plan_json(in);
  if (format == "csv") {
    urban::export_plan_csv(plan, out_prefix);
  } else if (format == "pgm") {
    urban::export_plan_pgm(plan, out_prefix);
  } else {
    urban::save_plan_json(plan, 0, 0, out_prefix + ".json");
  }
  std::cout << "exported " << in << " as " << format << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical land-use plan generator"};
  app.require_subcommand(1);

  CommonOpts synth_common, zones_common, train_common, gen_common, eval_common;
  std::string synth_out, zones_data, train_data, train_out;
  std::string gen_data, gen_model, gen_out, eval_data, eval_model, eval_out;
  std::string export_in, export_format = "csv", export_out;
  bool synth_force = false, zones_force = false, train_force = false;
  int gen_instruction = 0;
  std::size_t gen_context = 0;
  std::uint64_t gen_seed = 0;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, synth_common);
  synth->add_option("--out", synth_out, "dataset directory");
  synth->add_flag("--force", synth_force, "overwrite existing output");

  CLI::App* zones = app.add_subcommand("zones", "discover functional zones");
  add_common(zones, zones_common);
  zones->add_option("--data", zones_data, "dataset directory");
  zones->add_flag("--force", zones_force, "overwrite existing output");

  CLI::App* train = app.add_subcommand("train", "train all stages");
  add_common(train, train_common);
  train->add_option("--data", train_data, "dataset directory");
  train->add_option("--out", train_out, "model output directory");
  train->add_flag("--force", train_force, "overwrite existing output");

  CLI::App* generate = app.add_subcommand("generate", "generate one plan");
  add_common(generate, gen_common);
  generate->add_option("--data", gen_data, "dataset directory");
  generate->add_option("--model", gen_model, "model checkpoint");
  generate->add_option("--instruction", gen_instruction, "green level 0..4")
      ->required();
  generate->add_option("--context", gen_context, "context sample index");
  generate->add_option("--seed", gen_seed, "generation seed");
  generate->add_option("--out", gen_out, "plan JSON path")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate on the test split");
  add_common(eval, eval_common);
  eval->add_option("--data", eval_data, "dataset directory");
  eval->add_option("--model", eval_model, "model checkpoint");
  eval->add_option("--out", eval_out, "report path prefix")->required();

  CLI::App* exp = app.add_subcommand("export", "render a plan file");
  exp->add_option("--in", export_in, "plan JSON path")->required();
  exp->add_option("--format", export_format, "csv, pgm, or json");
  exp->add_option("--out", export_out, "output prefix")->required();

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth_common, synth_out, synth_force);
    if (zones->parsed()) return cmd_zones(zones_common, zones_data, zones_force);
    if (train->parsed())
      return cmd_train(train_common, train_data, train_out, train_force);
    if (generate->parsed())
      return cmd_generate(gen_common, gen_data, gen_model, gen_instruction,
                          gen_context, gen_seed, gen_out);
    if (eval->parsed())
      return cmd_eval(eval_common, eval_data, eval_model, eval_out);
    if (exp->parsed()) return cmd_export(export_in, export_format, export_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  } catch (const urban::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const urban::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
