#include "urbanplan/plan_export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace urban {

namespace {

using nlohmann::json;

json tensor3_to_json(const Tensor& t) {
  json rows = json::array();
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    json cols = json::array();
    for (std::size_t j = 0; j < t.dim(1); ++j) {
      json cats = json::array();
      for (std::size_t k = 0; k < t.dim(2); ++k) cats.push_back(t.at(i, j, k));
      cols.push_back(std::move(cats));
    }
    rows.push_back(std::move(cols));
  }
  return rows;
}

Tensor tensor3_from_json(const json& rows) {
  const std::size_t n = rows.size();
  const std::size_t n2 = rows.at(0).size();
  const std::size_t c = rows.at(0).at(0).size();
  Tensor t({n, n2, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t k = 0; k < c; ++k)
        t.at(i, j, k) = rows.at(i).at(j).at(k).get<double>();
  return t;
}

std::string category_suffix(std::size_t cat) {
  std::ostringstream os;
  os << "_cat" << std::setw(2) << std::setfill('0') << cat;
  return os.str();
}

}  // namespace

void save_plan_json(const GeneratedPlan& plan, int instruction,
                    std::uint64_t seed, const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["n"] = plan.zones.n;
  j["c"] = plan.raw.dim(2);
  j["instruction"] = instruction;
  j["seed"] = seed;
  json zone_rows = json::array();
  for (int r = 0; r < plan.zones.n; ++r) {
    json row = json::array();
    for (int c2 = 0; c2 < plan.zones.n; ++c2) row.push_back(plan.zones.label(r, c2));
    zone_rows.push_back(std::move(row));
  }
  j["zones"] = std::move(zone_rows);
  j["configuration_raw"] = tensor3_to_json(plan.raw);
  j["configuration"] = tensor3_to_json(plan.clamped);
  std::ofstream os(path);
  if (!os) throw RuntimeFailure("plan: cannot write " + path);
  os << j.dump() << '\n';
}

GeneratedPlan load_plan_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw RuntimeFailure("plan: cannot open " + path);
  json j = json::parse(is);
  GeneratedPlan plan;
  plan.zones.n = j.at("n").get<int>();
  for (const auto& row : j.at("zones")) {
    for (const auto& v : row) plan.zones.labels.push_back(v.get<int>());
  }
  plan.raw = tensor3_from_json(j.at("configuration_raw"));
  plan.clamped = tensor3_from_json(j.at("configuration"));
  return plan;
}

void export_plan_csv(const GeneratedPlan& plan, const std::string& prefix) {
  const std::size_t n = plan.clamped.dim(0), c = plan.clamped.dim(2);
  for (std::size_t cat = 0; cat < c; ++cat) {
    std::ofstream os(prefix + category_suffix(cat) + ".csv");
    if (!os) throw RuntimeFailure("plan: cannot write csv for " + prefix);
    os.precision(17);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j) os << ',';
        os << plan.clamped.at(i, j, cat);
      }
      os << '\n';
    }
  }
}

void export_plan_pgm(const GeneratedPlan& plan, const std::string& prefix) {
  const std::size_t n = plan.clamped.dim(0), c = plan.clamped.dim(2);
  for (std::size_t cat = 0; cat < c; ++cat) {
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        peak = std::max(peak, plan.clamped.at(i, j, cat));
    std::ofstream os(prefix + category_suffix(cat) + ".pgm", std::ios::binary);
    if (!os) throw RuntimeFailure("plan: cannot write pgm for " + prefix);
    os << "P5\n" << n << ' ' << n << "\n255\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = peak > 0.0 ? plan.clamped.at(i, j, cat) / peak : 0.0;
        os.put(static_cast<char>(
            static_cast<unsigned char>(std::lround(255.0 * v))));
      }
    }
  }
}

}  // namespace urban
