#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace urban {

struct Dataset;

// N x N raster of functional-zone labels in [0, M).
struct ZonePlan {
  int n = 0;
  std::vector<int> labels;  // row-major, n*n entries

  int label(int row, int col) const { return labels[static_cast<std::size_t>(row * n + col)]; }
};

void save_zone_plan_csv(const ZonePlan& plan, const std::string& path);
ZonePlan load_zone_plan_csv(const std::string& path, int n);

// Grids are words, trajectories are sentences; all trajectories of an area
// concatenate into one document.
struct Corpus {
  int vocab_size = 0;  // n*n
  std::vector<std::vector<int>> documents;
};

Corpus corpus_from_dataset(const Dataset& dataset);

struct TopicModelOptions {
  int topics = 4;
  double alpha = 12.5;  // 50/M convention
  double beta = 0.01;
  int iterations = 200;
  std::uint64_t seed = 1;
};

// Collapsed Gibbs sampler for latent Dirichlet allocation over grid tokens.
class TopicModel {
 public:
  static TopicModel fit(const Corpus& corpus, const TopicModelOptions& opts);

  // Builds a state from externally fixed assignments (counts are derived).
  static TopicModel with_assignments(const Corpus& corpus, int topics,
                                     std::vector<std::vector<int>> assignments);

  int topics() const { return topics_; }
  int vocab_size() const { return vocab_; }
  const std::vector<std::vector<int>>& assignments() const { return assign_; }

  // Count matrices must match a full recount of the assignments.
  bool counts_consistent() const;

  int corpus_majority_topic() const;

  // Labels every grid of one area: argmax over that document's token
  // assignments (ties -> lowest topic), nearest visited grid by Manhattan
  // distance for unvisited grids (ties -> lowest grid index), corpus
  // majority topic when the document is empty.
  ZonePlan zone_labels(std::size_t doc, int n) const;

 private:
  int topics_ = 0;
  int vocab_ = 0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<std::vector<int>> docs_;
  std::vector<std::vector<int>> assign_;
  std::vector<int> doc_topic_;    // docs x topics
  std::vector<int> topic_word_;   // topics x vocab
  std::vector<int> topic_total_;  // topics
};

}  // namespace urban
