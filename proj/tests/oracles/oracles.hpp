#pragma once

// Brute-force references shared by the unit and acceptance tests. They work
// from raw records and share no code with the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "moocrep/corpus.hpp"

namespace moocrep::oracle {

struct Complexity {
  std::string concept_id;
  double alc = 0.0;
  double ast = 0.0;
  double d = 0.0;
};

/// Walks every course's modules and lectures, recording where each concept
/// is tagged; courses are visited in file order.
inline std::vector<Complexity> complexity(const Corpus& corpus) {
  std::vector<Complexity> out;
  for (const Concept& concept_ : corpus.concepts()) {
    double alc = 0.0, ast = 0.0;
    int courses = 0;
    for (const Course& course : corpus.courses()) {
      std::vector<std::size_t> hits;
      std::size_t position = 0;
      for (const Module& module : course.modules) {
        for (const std::string& lecture_id : module.lecture_ids) {
          for (const Lecture& lecture : corpus.lectures()) {
            if (lecture.id != lecture_id) continue;
            if (std::find(lecture.concept_ids.begin(), lecture.concept_ids.end(), concept_.id) !=
                lecture.concept_ids.end())
              hits.push_back(position);
          }
          ++position;
        }
      }
      if (hits.empty()) continue;
      ++courses;
      const double n = static_cast<double>(position);
      alc += static_cast<double>(hits.size()) / n;
      ast += static_cast<double>(*std::max_element(hits.begin(), hits.end()) -
                                 *std::min_element(hits.begin(), hits.end()) + 1) /
             n;
    }
    if (courses == 0) continue;
    alc /= courses;
    ast /= courses;
    out.push_back({concept_.id, alc, ast, (alc + ast) / 2.0});
  }
  return out;
}

/// Position (1-based) of `truth` after a stable descending sort of the scores.
inline std::size_t rank_by_sorting(const std::vector<double>& scores, std::size_t truth) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), truth) - order.begin()) + 1;
}

struct Ranking {
  double hr = 0.0, ndcg = 0.0, mrr = 0.0;
};

/// Metrics over events given as (candidate scores, index of the true item).
inline Ranking ranking(const std::vector<std::vector<double>>& scores, const std::vector<std::size_t>& truths,
                       std::size_t k) {
  Ranking r;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    const std::size_t pos = rank_by_sorting(scores[e], truths[e]);
    if (pos <= k) {
      r.hr += 1.0;
      r.ndcg += std::log(2.0) / std::log(static_cast<double>(pos) + 1.0);
    }
    r.mrr += 1.0 / static_cast<double>(pos);
  }
  const double n = static_cast<double>(scores.size());
  r.hr /= n;
  r.ndcg /= n;
  r.mrr /= n;
  return r;
}

struct Classification {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Macro average over the two classes, each scored one-vs-rest from the raw
/// prediction and label vectors; undefined ratios count as 0.
inline Classification macro(const std::vector<int>& predicted, const std::vector<int>& actual) {
  Classification total;
  for (int cls : {1, 0}) {
    double hit = 0, said = 0, truly = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      if (predicted[i] == cls) said += 1;
      if (actual[i] == cls) truly += 1;
      if (predicted[i] == cls && actual[i] == cls) hit += 1;
    }
    const double p = said > 0 ? hit / said : 0.0;
    const double r = truly > 0 ? hit / truly : 0.0;
    total.precision += p / 2;
    total.recall += r / 2;
    total.f1 += (p + r > 0 ? 2 * p * r / (p + r) : 0.0) / 2;
  }
  return total;
}

}  // namespace moocrep::oracle
