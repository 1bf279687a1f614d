#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "moocrep/corpus.hpp"

namespace moocrep {

struct SyntheticConfig {
  std::size_t num_concepts = 50;
  std::size_t chain_length = 10;
  std::size_t num_courses = 10;
  std::size_t lectures_per_course = 15;
  std::size_t modules_per_course = 3;
  std::size_t num_users = 200;
  std::size_t min_segment = 4;    // shortest chain segment a course covers
  double user_noise = 0.1;        // per-step probability of a skip or a swap
  std::size_t max_concepts_per_lecture = 4;
};

struct SyntheticData {
  Corpus corpus;  // includes the learner interaction logs
  std::vector<PrereqLabel> prereqs;
  std::vector<std::vector<std::string>> chains;  // concept ids, most basic first

  std::vector<InteractionLog> logs() const {
    return {corpus.interactions().begin(), corpus.interactions().end()};
  }
};

/// Planted-structure corpus. Concepts form prerequisite chains of
/// `chain_length` (a trailing shorter chain takes any remainder). Each course
/// walks a contiguous segment of one chain in order; basic concepts keep
/// being tagged on later lectures more often than advanced ones. Learners
/// watch course prefixes with seeded skips and swaps. Prerequisite labels
/// hold every ordered in-chain pair as positive, plus an equal number of
/// negatives split between reversed positives and cross-chain pairs.
/// Deterministic per (cfg, seed).
SyntheticData generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace moocrep
