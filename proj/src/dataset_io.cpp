#include "urbanplan/dataset_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "urbanplan/config.hpp"

namespace urban {

namespace {

using nlohmann::json;

json config_to_json(const Tensor& t) {
  const std::size_t n = t.dim(0), c = t.dim(2);
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json cols = json::array();
    for (std::size_t j = 0; j < n; ++j) {
      json cats = json::array();
      for (std::size_t k = 0; k < c; ++k) {
        cats.push_back(static_cast<long long>(t.at(i, j, k)));
      }
      cols.push_back(std::move(cats));
    }
    rows.push_back(std::move(cols));
  }
  return rows;
}

Tensor config_from_json(const json& rows, int n, int c) {
  Tensor t({static_cast<std::size_t>(n), static_cast<std::size_t>(n),
            static_cast<std::size_t>(c)});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < c; ++k) {
        t.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
             static_cast<std::size_t>(k)) =
            rows.at(static_cast<std::size_t>(i))
                .at(static_cast<std::size_t>(j))
                .at(static_cast<std::size_t>(k))
                .get<double>();
      }
    }
  }
  return t;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& dir) {
  std::filesystem::create_directories(dir);

  json manifest;
  manifest["schema_version"] = 1;
  manifest["n"] = dataset.n;
  manifest["c"] = dataset.c;
  manifest["m"] = dataset.m;
  manifest["k"] = dataset.samples.size();
  manifest["seed"] = dataset.seed;
  manifest["bin_edges"] = dataset.bin_edges;
  manifest["planted_zones"] = dataset.planted_zones;
  manifest["train_count"] = dataset.train_count();
  {
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw RuntimeFailure("dataset: cannot write manifest in " + dir);
    os << manifest.dump(2) << '\n';
  }

  std::ofstream os(dir + "/samples.jsonl");
  if (!os) throw RuntimeFailure("dataset: cannot write samples in " + dir);
  for (const CitySample& s : dataset.samples) {
    json line;
    line["schema_version"] = 1;
    line["index"] = s.index;
    line["split"] = s.test_split ? "test" : "train";
    line["green_rate"] = s.green_rate;
    line["instruction"] = s.instruction;
    line["configuration"] = config_to_json(s.configuration);
    line["context_features"] = s.context_features;
    line["trajectories"] = s.trajectories;
    os << line.dump() << '\n';
  }
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream ms(dir + "/manifest.json");
  if (!ms) throw RuntimeFailure("dataset: cannot open manifest in " + dir);
  json manifest = json::parse(ms);
  if (manifest.at("schema_version").get<int>() != 1) {
    throw RuntimeFailure("dataset: unsupported schema version");
  }

  Dataset ds;
  ds.n = manifest.at("n").get<int>();
  ds.c = manifest.at("c").get<int>();
  ds.m = manifest.at("m").get<int>();
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  const auto edges = manifest.at("bin_edges");
  for (std::size_t i = 0; i < 4; ++i) ds.bin_edges[i] = edges.at(i).get<double>();
  ds.planted_zones = manifest.at("planted_zones").get<std::vector<int>>();

  std::ifstream is(dir + "/samples.jsonl");
  if (!is) throw RuntimeFailure("dataset: cannot open samples in " + dir);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    CitySample s;
    s.index = j.at("index").get<std::uint64_t>();
    s.test_split = j.at("split").get<std::string>() == "test";
    s.green_rate = j.at("green_rate").get<double>();
    s.instruction = j.at("instruction").get<int>();
    s.configuration = config_from_json(j.at("configuration"), ds.n, ds.c);
    s.context_features =
        j.at("context_features").get<std::vector<std::vector<double>>>();
    s.trajectories = j.at("trajectories").get<std::vector<std::vector<int>>>();
    ds.samples.push_back(std::move(s));
  }
  const std::uint64_t expected = manifest.at("k").get<std::uint64_t>();
  if (ds.samples.size() != expected) {
    throw RuntimeFailure("dataset: sample count does not match manifest");
  }
  return ds;
}

}  // namespace urban
