#include "urbanplan/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace urban {

namespace {

constexpr double kSmoothing = 1e-9;
constexpr double kSimplexTolerance = 1e-9;
constexpr double kLogFloor = 1e-12;

void require_simplex(const std::vector<double>& p, const char* who) {
  double total = 0.0;
  for (double v : p) {
    if (v < -kSimplexTolerance) {
      throw std::invalid_argument(std::string(who) + ": negative entry");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument(std::string(who) + ": does not sum to 1");
  }
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    total += p[i] * std::log(p[i] / std::max(q[i], kLogFloor));
  }
  return total;
}

}  // namespace

std::vector<double> category_distribution(
    const std::vector<const Tensor*>& configs) {
  if (configs.empty()) {
    throw std::invalid_argument("category_distribution: empty list");
  }
  const std::size_t c = configs[0]->dim(configs[0]->rank() - 1);
  std::vector<double> mass(c, 0.0);
  double total = 0.0;
  for (const Tensor* cfg : configs) {
    if (cfg->dim(cfg->rank() - 1) != c) {
      throw std::invalid_argument("category_distribution: category mismatch");
    }
    const std::size_t cells = cfg->size() / c;
    const double* p = cfg->data();
    for (std::size_t cell = 0; cell < cells; ++cell) {
      for (std::size_t k = 0; k < c; ++k) {
        const double v = std::max(p[cell * c + k], 0.0);
        mass[k] += v;
        total += v;
      }
    }
  }
  if (total <= 0.0) {
    throw std::invalid_argument("category_distribution: all-zero total");
  }
  double smoothed_total = 0.0;
  for (double& v : mass) {
    v += kSmoothing;
    smoothed_total += v;
  }
  for (double& v : mass) v /= smoothed_total;
  return mass;
}

double divergence(Divergence kind, const std::vector<double>& p,
                  const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) {
    throw std::invalid_argument("divergence: size mismatch");
  }
  require_simplex(p, "divergence(p)");
  require_simplex(q, "divergence(q)");
  switch (kind) {
    case Divergence::KL:
      return kl_divergence(p, q);
    case Divergence::JS: {
      std::vector<double> mid(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) mid[i] = 0.5 * (p[i] + q[i]);
      return 0.5 * kl_divergence(p, mid) + 0.5 * kl_divergence(q, mid);
    }
    case Divergence::Hellinger: {
      double acc = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(std::max(p[i], 0.0)) -
                         std::sqrt(std::max(q[i], 0.0));
        acc += d * d;
      }
      return std::sqrt(acc) / std::sqrt(2.0);
    }
    case Divergence::Cosine: {
      double dot = 0.0, np = 0.0, nq = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        dot += p[i] * q[i];
        np += p[i] * p[i];
        nq += q[i] * q[i];
      }
      return 1.0 - dot / (std::sqrt(np) * std::sqrt(nq));
    }
  }
  throw std::logic_error("divergence: unknown kind");
}

double avg_metric(Divergence kind, const std::vector<MetricGroup>& groups) {
  double weight_total = 0.0;
  double acc = 0.0;
  for (const MetricGroup& g : groups) {
    if (g.weight < 0.0) throw std::invalid_argument("avg_metric: negative weight");
    if (g.weight == 0.0) continue;
    acc += g.weight * divergence(kind, g.original, g.generated);
    weight_total += g.weight;
  }
  if (weight_total <= 0.0) {
    throw std::invalid_argument("avg_metric: all weights zero");
  }
  return acc / weight_total;
}

GroupReport build_group_report(
    const std::vector<std::vector<const Tensor*>>& real_by_level,
    const std::vector<std::vector<const Tensor*>>& generated_by_level) {
  if (real_by_level.size() != generated_by_level.size()) {
    throw std::invalid_argument("build_group_report: level count mismatch");
  }
  GroupReport report;
  std::vector<MetricGroup> groups;
  for (std::size_t level = 0; level < real_by_level.size(); ++level) {
    if (real_by_level[level].empty()) continue;
    if (generated_by_level[level].empty()) {
      throw std::invalid_argument(
          "build_group_report: level has originals but no generations");
    }
    MetricGroup g;
    g.weight = static_cast<double>(real_by_level[level].size());
    g.original = category_distribution(real_by_level[level]);
    g.generated = category_distribution(generated_by_level[level]);
    GroupEntry entry;
    entry.level = static_cast<int>(level);
    entry.weight = g.weight;
    entry.kl = divergence(Divergence::KL, g.original, g.generated);
    entry.js = divergence(Divergence::JS, g.original, g.generated);
    entry.hd = divergence(Divergence::Hellinger, g.original, g.generated);
    entry.cos = divergence(Divergence::Cosine, g.original, g.generated);
    report.levels.push_back(entry);
    groups.push_back(std::move(g));
  }
  report.avg_kl = avg_metric(Divergence::KL, groups);
  report.avg_js = avg_metric(Divergence::JS, groups);
  report.avg_hd = avg_metric(Divergence::Hellinger, groups);
  report.avg_cos = avg_metric(Divergence::Cosine, groups);
  return report;
}

void save_group_report_json(const GroupReport& report, const std::string& path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["levels"] = nlohmann::json::array();
  for (const GroupEntry& e : report.levels) {
    j["levels"].push_back({{"level", e.level},
                           {"weight", e.weight},
                           {"kl", e.kl},
                           {"js", e.js},
                           {"hd", e.hd},
                           {"cos", e.cos}});
  }
  j["avg"] = {{"kl", report.avg_kl},
              {"js", report.avg_js},
              {"hd", report.avg_hd},
              {"cos", report.avg_cos}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("report: cannot write " + path);
  os << j.dump(2) << '\n';
}

void save_group_report_csv(const GroupReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("report: cannot write " + path);
  os << "level,weight,kl,js,hd,cos\n";
  os.precision(17);
  for (const GroupEntry& e : report.levels) {
    os << e.level << ',' << e.weight << ',' << e.kl << ',' << e.js << ','
       << e.hd << ',' << e.cos << '\n';
  }
  os << "avg," << 0 << ',' << report.avg_kl << ',' << report.avg_js << ','
     << report.avg_hd << ',' << report.avg_cos << '\n';
}

}  // namespace urban
