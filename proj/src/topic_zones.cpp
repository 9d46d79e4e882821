#include "urbanplan/topic_zones.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "urbanplan/rng.hpp"
#include "urbanplan/synth.hpp"

namespace urban {

void save_zone_plan_csv(const ZonePlan& plan, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("zone plan: cannot write " + path);
  for (int r = 0; r < plan.n; ++r) {
    for (int c = 0; c < plan.n; ++c) {
      if (c) os << ',';
      os << plan.label(r, c);
    }
    os << '\n';
  }
}

ZonePlan load_zone_plan_csv(const std::string& path, int n) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("zone plan: cannot read " + path);
  ZonePlan plan;
  plan.n = n;
  plan.labels.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) plan.labels.push_back(std::stoi(cell));
  }
  if (plan.labels.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::runtime_error("zone plan: wrong cell count in " + path);
  }
  return plan;
}

Corpus corpus_from_dataset(const Dataset& dataset) {
  Corpus corpus;
  corpus.vocab_size = dataset.n * dataset.n;
  corpus.documents.reserve(dataset.samples.size());
  for (const CitySample& s : dataset.samples) {
    std::vector<int> doc;
    for (const auto& traj : s.trajectories) {
      doc.insert(doc.end(), traj.begin(), traj.end());
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

TopicModel TopicModel::with_assignments(const Corpus& corpus, int topics,
                                        std::vector<std::vector<int>> assignments) {
  if (assignments.size() != corpus.documents.size()) {
    throw std::invalid_argument("with_assignments: document count mismatch");
  }
  TopicModel model;
  model.topics_ = topics;
  model.vocab_ = corpus.vocab_size;
  model.alpha_ = 0.0;
  model.beta_ = 0.0;
  model.docs_ = corpus.documents;
  model.assign_ = std::move(assignments);
  const std::size_t d = corpus.documents.size();
  model.doc_topic_.assign(d * static_cast<std::size_t>(topics), 0);
  model.topic_word_.assign(
      static_cast<std::size_t>(topics) * static_cast<std::size_t>(corpus.vocab_size), 0);
  model.topic_total_.assign(static_cast<std::size_t>(topics), 0);
  for (std::size_t di = 0; di < d; ++di) {
    if (model.assign_[di].size() != model.docs_[di].size()) {
      throw std::invalid_argument("with_assignments: token count mismatch");
    }
    for (std::size_t t = 0; t < model.docs_[di].size(); ++t) {
      const int z = model.assign_[di][t];
      if (z < 0 || z >= topics) {
        throw std::invalid_argument("with_assignments: topic out of range");
      }
      const int w = model.docs_[di][t];
      ++model.doc_topic_[di * static_cast<std::size_t>(topics) + static_cast<std::size_t>(z)];
      ++model.topic_word_[static_cast<std::size_t>(z) *
                              static_cast<std::size_t>(corpus.vocab_size) +
                          static_cast<std::size_t>(w)];
      ++model.topic_total_[static_cast<std::size_t>(z)];
    }
  }
  return model;
}

TopicModel TopicModel::fit(const Corpus& corpus, const TopicModelOptions& opts) {
  if (opts.topics < 1 || opts.iterations < 1) {
    throw std::invalid_argument("TopicModel: topics/iterations < 1");
  }
  std::size_t token_count = 0;
  for (const auto& doc : corpus.documents) token_count += doc.size();
  if (corpus.documents.empty() || token_count == 0) {
    throw std::invalid_argument("TopicModel: empty corpus");
  }
  for (const auto& doc : corpus.documents) {
    for (int w : doc) {
      if (w < 0 || w >= corpus.vocab_size) {
        throw std::invalid_argument("TopicModel: token out of range");
      }
    }
  }

  TopicModel model;
  model.topics_ = opts.topics;
  model.vocab_ = corpus.vocab_size;
  model.alpha_ = opts.alpha;
  model.beta_ = opts.beta;
  model.docs_ = corpus.documents;

  const int k = opts.topics;
  const int v = corpus.vocab_size;
  const std::size_t d = corpus.documents.size();
  model.doc_topic_.assign(d * static_cast<std::size_t>(k), 0);
  model.topic_word_.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(v), 0);
  model.topic_total_.assign(static_cast<std::size_t>(k), 0);
  model.assign_.resize(d);

  Rng rng(opts.seed);
  for (std::size_t di = 0; di < d; ++di) {
    model.assign_[di].resize(model.docs_[di].size());
    for (std::size_t t = 0; t < model.docs_[di].size(); ++t) {
      const int z = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      const int w = model.docs_[di][t];
      model.assign_[di][t] = z;
      ++model.doc_topic_[di * static_cast<std::size_t>(k) + static_cast<std::size_t>(z)];
      ++model.topic_word_[static_cast<std::size_t>(z) * static_cast<std::size_t>(v) +
                          static_cast<std::size_t>(w)];
      ++model.topic_total_[static_cast<std::size_t>(z)];
    }
  }

  std::vector<double> weight(static_cast<std::size_t>(k));
  const double vbeta = static_cast<double>(v) * opts.beta;
  for (int sweep = 0; sweep < opts.iterations; ++sweep) {
    for (std::size_t di = 0; di < d; ++di) {
      int* dt = model.doc_topic_.data() + di * static_cast<std::size_t>(k);
      for (std::size_t t = 0; t < model.docs_[di].size(); ++t) {
        const int w = model.docs_[di][t];
        const int old = model.assign_[di][t];
        --dt[old];
        --model.topic_word_[static_cast<std::size_t>(old) * static_cast<std::size_t>(v) +
                            static_cast<std::size_t>(w)];
        --model.topic_total_[static_cast<std::size_t>(old)];

        double total = 0.0;
        for (int z = 0; z < k; ++z) {
          const double p =
              (static_cast<double>(dt[z]) + opts.alpha) *
              (static_cast<double>(
                   model.topic_word_[static_cast<std::size_t>(z) * static_cast<std::size_t>(v) +
                                     static_cast<std::size_t>(w)]) +
               opts.beta) /
              (static_cast<double>(model.topic_total_[static_cast<std::size_t>(z)]) + vbeta);
          weight[static_cast<std::size_t>(z)] = p;
          total += p;
        }
        double r = rng.uniform01() * total;
        int next = k - 1;
        for (int z = 0; z < k; ++z) {
          r -= weight[static_cast<std::size_t>(z)];
          if (r < 0.0) {
            next = z;
            break;
          }
        }

        model.assign_[di][t] = next;
        ++dt[next];
        ++model.topic_word_[static_cast<std::size_t>(next) * static_cast<std::size_t>(v) +
                            static_cast<std::size_t>(w)];
        ++model.topic_total_[static_cast<std::size_t>(next)];
      }
    }
  }
  return model;
}

bool TopicModel::counts_consistent() const {
  std::vector<int> dt(doc_topic_.size(), 0);
  std::vector<int> tw(topic_word_.size(), 0);
  std::vector<int> tt(topic_total_.size(), 0);
  for (std::size_t di = 0; di < docs_.size(); ++di) {
    for (std::size_t t = 0; t < docs_[di].size(); ++t) {
      const int z = assign_[di][t];
      const int w = docs_[di][t];
      ++dt[di * static_cast<std::size_t>(topics_) + static_cast<std::size_t>(z)];
      ++tw[static_cast<std::size_t>(z) * static_cast<std::size_t>(vocab_) +
           static_cast<std::size_t>(w)];
      ++tt[static_cast<std::size_t>(z)];
    }
  }
  return dt == doc_topic_ && tw == topic_word_ && tt == topic_total_;
}

int TopicModel::corpus_majority_topic() const {
  int best = 0;
  for (int z = 1; z < topics_; ++z) {
    if (topic_total_[static_cast<std::size_t>(z)] >
        topic_total_[static_cast<std::size_t>(best)]) {
      best = z;
    }
  }
  return best;
}

ZonePlan TopicModel::zone_labels(std::size_t doc, int n) const {
  if (doc >= docs_.size()) throw std::out_of_range("zone_labels: bad document");
  if (n * n != vocab_) throw std::invalid_argument("zone_labels: n*n != vocab");

  const std::size_t cells = static_cast<std::size_t>(vocab_);
  std::vector<int> counts(cells * static_cast<std::size_t>(topics_), 0);
  std::vector<char> visited(cells, 0);
  for (std::size_t t = 0; t < docs_[doc].size(); ++t) {
    const int w = docs_[doc][t];
    visited[static_cast<std::size_t>(w)] = 1;
    ++counts[static_cast<std::size_t>(w) * static_cast<std::size_t>(topics_) +
             static_cast<std::size_t>(assign_[doc][t])];
  }

  ZonePlan plan;
  plan.n = n;
  plan.labels.assign(cells, 0);

  bool any_visited = false;
  for (std::size_t g = 0; g < cells; ++g) {
    if (!visited[g]) continue;
    any_visited = true;
    const int* row = counts.data() + g * static_cast<std::size_t>(topics_);
    int best = 0;
    for (int z = 1; z < topics_; ++z) {
      if (row[z] > row[best]) best = z;
    }
    plan.labels[g] = best;
  }

  if (!any_visited) {
    const int fallback = corpus_majority_topic();
    for (int& l : plan.labels) l = fallback;
    return plan;
  }

  for (std::size_t g = 0; g < cells; ++g) {
    if (visited[g]) continue;
    const int gr = static_cast<int>(g) / n;
    const int gc = static_cast<int>(g) % n;
    int best_dist = std::numeric_limits<int>::max();
    std::size_t best_grid = 0;
    for (std::size_t o = 0; o < cells; ++o) {
      if (!visited[o]) continue;
      const int dist = std::abs(gr - static_cast<int>(o) / n) +
                       std::abs(gc - static_cast<int>(o) % n);
      if (dist < best_dist) {
        best_dist = dist;
        best_grid = o;
      }
    }
    plan.labels[g] = plan.labels[best_grid];
  }
  return plan;
}

}  // namespace urban
