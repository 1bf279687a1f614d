#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "moocrep/corpus.hpp"
#include "moocrep/embeddings.hpp"
#include "moocrep/metrics.hpp"

namespace moocrep {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1 cut into three contiguous parts. Part sizes are
/// floor(n * p); leftover items go to the parts with the largest fractional
/// remainders (earlier part on ties). Throws ValidationError when the
/// proportions do not sum to 1 or a part with nonzero proportion would be empty.
Split make_split(std::size_t n, std::span<const double> proportions, std::uint64_t seed);
Split make_split(std::size_t n, std::uint64_t seed);  // 80/10/10

struct PrereqEvalConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 300;
  double lr = 1e-2;
  std::uint64_t seed = 0;
};

/// Trains a two-layer ReLU classifier on [ea; eb; ea - eb; ea * eb] over the
/// train part of the split (full-batch Adam on cross-entropy, features
/// standardized with train statistics) and scores the test part. When the
/// split has a validation part, the weights from the epoch with the lowest
/// validation loss are kept.
/// Throws ValidationError on a missing embedding, an empty test part, or a
/// train part lacking either class.
ClassificationScores eval_prereq(const EmbeddingSet& embeddings, std::span<const PrereqLabel> labels,
                                 const Split& split, const PrereqEvalConfig& cfg = {});

/// Pairs every positive (a, b) with one seeded negative, alternating between
/// the reversal (b, a) and a random concept pair that is not a positive.
std::vector<PrereqLabel> with_negatives(std::span<const PrereqLabel> positives,
                                        std::span<const std::string> concept_ids, std::uint64_t seed);

struct RecEvalConfig {
  std::size_t window = 5;
  std::size_t k = 10;
};

struct RecScores {
  double hr = 0.0;
  double ndcg = 0.0;
  double mrr = 0.0;
  std::size_t events = 0;
};

/// Rank of the true item among candidate scores: 1 + (#higher) + (#equal at a
/// lower index).
std::size_t rank_of(std::span<const double> scores, std::size_t truth);

/// Ranks, for every next-lecture event of the test users, the true lecture
/// among all candidates by cosine to the mean of the last `window` watched
/// lectures. The split indexes `logs`. Zero-norm vectors score 0.
/// Throws ValidationError on a log shorter than 2, an id without an
/// embedding, or an empty test part.
std::vector<std::size_t> recommendation_ranks(const EmbeddingSet& embeddings, std::span<const std::string> candidates,
                                              std::span<const InteractionLog> logs, const Split& split,
                                              const RecEvalConfig& cfg = {});

RecScores eval_rec(const EmbeddingSet& embeddings, std::span<const std::string> candidates,
                   std::span<const InteractionLog> logs, const Split& split, const RecEvalConfig& cfg = {});

struct ReportRow {
  std::string task;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// TSV with header "task\tmetric\tvalue\tseed\tconfig_hash".
void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

}  // namespace moocrep
