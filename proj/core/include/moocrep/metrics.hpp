#pragma once

#include <cstddef>
#include <span>

namespace moocrep {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

// Each returns 0 when its denominator is zero.
double precision(const Confusion& c);
double recall(const Confusion& c);
double f1(const Confusion& c);

struct ClassificationScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Unweighted mean over the positive and the negative class.
ClassificationScores macro_scores(const Confusion& c);

/// Confusion of binary predictions against labels of the same length.
Confusion confusion(std::span<const bool> predicted, std::span<const bool> actual);

// Ranks are 1-based positions of the single relevant item. All three throw
// ValidationError on an empty list, a zero rank, or k < 1.
double hr_at_k(std::span<const std::size_t> ranks, std::size_t k);
double ndcg_at_k(std::span<const std::size_t> ranks, std::size_t k);
double mrr(std::span<const std::size_t> ranks);

}  // namespace moocrep
