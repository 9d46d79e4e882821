#pragma once

#include <string>
#include <vector>

#include "urbanplan/tensor.hpp"

namespace urban {

enum class Divergence { KL, JS, Hellinger, Cosine };

// Aggregate per-category mass over all grids of all configurations, with
// negatives clamped to zero and 1e-9 smoothing before normalization.
// Rejects an all-zero total.
std::vector<double> category_distribution(const std::vector<const Tensor*>& configs);

// Both arguments must lie on the probability simplex (1e-9 tolerance).
// KL uses natural log with 0*ln(0) = 0 and the right argument floored at
// 1e-12; JS is the mean KL to the midpoint; Hellinger is normalized to [0,1];
// Cosine is 1 - cos(p, q).
double divergence(Divergence kind, const std::vector<double>& p,
                  const std::vector<double>& q);

struct MetricGroup {
  double weight = 0.0;
  std::vector<double> original;
  std::vector<double> generated;
};

// Weighted mean of d(P_j, Phat_j) across groups; zero-weight groups are
// skipped and an all-zero weight vector is an error.
double avg_metric(Divergence kind, const std::vector<MetricGroup>& groups);

struct GroupEntry {
  int level = 0;
  double weight = 0.0;
  double kl = 0.0, js = 0.0, hd = 0.0, cos = 0.0;
};

struct GroupReport {
  std::vector<GroupEntry> levels;
  double avg_kl = 0.0, avg_js = 0.0, avg_hd = 0.0, avg_cos = 0.0;
};

// One group per instruction level; levels with no real samples are skipped.
GroupReport build_group_report(
    const std::vector<std::vector<const Tensor*>>& real_by_level,
    const std::vector<std::vector<const Tensor*>>& generated_by_level);

void save_group_report_json(const GroupReport& report, const std::string& path);
void save_group_report_csv(const GroupReport& report, const std::string& path);

}  // namespace urban
