#include "moocrep/metrics.hpp"

#include <cmath>

#include "moocrep/error.hpp"

namespace moocrep {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_ranks(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ValidationError("rank list is empty");
  for (std::size_t r : ranks)
    if (r == 0) throw ValidationError("ranks are 1-based; got 0");
}

void check_k(std::size_t k) {
  if (k < 1) throw ValidationError("cutoff k must be at least 1");
}

}  // namespace

double precision(const Confusion& c) { return ratio(c.tp, c.tp + c.fp); }
double recall(const Confusion& c) { return ratio(c.tp, c.tp + c.fn); }

double f1(const Confusion& c) {
  const double p = precision(c);
  const double r = recall(c);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ClassificationScores macro_scores(const Confusion& c) {
  const Confusion neg{c.tn, c.fn, c.fp, c.tp};
  return {(precision(c) + precision(neg)) / 2.0, (recall(c) + recall(neg)) / 2.0, (f1(c) + f1(neg)) / 2.0};
}

Confusion confusion(std::span<const bool> predicted, std::span<const bool> actual) {
  if (predicted.size() != actual.size()) throw ValidationError("prediction and label counts differ");
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i]) {
      ++(actual[i] ? c.tp : c.fp);
    } else {
      ++(actual[i] ? c.fn : c.tn);
    }
  }
  return c;
}

double hr_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  check_k(k);
  check_ranks(ranks);
  std::size_t hits = 0;
  for (std::size_t r : ranks) hits += r <= k;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double ndcg_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  check_k(k);
  check_ranks(ranks);
  double total = 0.0;
  for (std::size_t r : ranks)
    if (r <= k) total += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  return total / static_cast<double>(ranks.size());
}

double mrr(std::span<const std::size_t> ranks) {
  check_ranks(ranks);
  double total = 0.0;
  for (std::size_t r : ranks) total += 1.0 / static_cast<double>(r);
  return total / static_cast<double>(ranks.size());
}

}  // namespace moocrep
