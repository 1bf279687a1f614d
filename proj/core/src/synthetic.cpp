#include "moocrep/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

namespace {

constexpr std::array<const char*, 12> kTopics = {"algebra", "geometry", "calculus",   "probability", "graphs",  "sorting",
                                                 "logic",   "automata", "statistics", "matrices",    "networks", "compilers"};

constexpr std::array<const char*, 24> kFiller = {"introduction", "example", "review",  "exercise", "summary", "proof",
                                                 "method",       "problem", "lemma",   "practice", "notes",   "overview",
                                                 "case",         "study",   "quiz",    "lab",      "part",    "basics",
                                                 "discussion",   "demo",    "outline", "recap",    "theory",  "solution"};

std::string topic_word(std::size_t chain) {
  if (chain < kTopics.size()) return kTopics[chain];
  return fmt::format("topic{}", chain);
}

std::string filler(std::mt19937_64& rng, std::size_t count) {
  std::uniform_int_distribution<std::size_t> pick(0, kFiller.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!out.empty()) out += ' ';
    out += kFiller[pick(rng)];
  }
  return out;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (cfg.chain_length == 0 || cfg.chain_length > cfg.num_concepts) {
    throw ValidationError(
        fmt::format("chain_length {} must be in [1, num_concepts={}]", cfg.chain_length, cfg.num_concepts));
  }
  if (cfg.num_courses > 0 && (cfg.modules_per_course == 0 || cfg.lectures_per_course < cfg.modules_per_course)) {
    throw ValidationError("lectures_per_course must be at least modules_per_course, which must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Chains of concept indices, most basic first.
  std::vector<std::vector<std::size_t>> chains;
  for (std::size_t start = 0; start < cfg.num_concepts; start += cfg.chain_length) {
    std::vector<std::size_t> chain;
    for (std::size_t k = start; k < std::min(start + cfg.chain_length, cfg.num_concepts); ++k) chain.push_back(k);
    chains.push_back(std::move(chain));
  }
  std::vector<std::size_t> chain_of(cfg.num_concepts);
  std::vector<std::size_t> depth_of(cfg.num_concepts);
  for (std::size_t j = 0; j < chains.size(); ++j) {
    for (std::size_t d = 0; d < chains[j].size(); ++d) {
      chain_of[chains[j][d]] = j;
      depth_of[chains[j][d]] = d;
    }
  }

  std::vector<Concept> concepts;
  for (std::size_t k = 0; k < cfg.num_concepts; ++k) {
    const std::string topic = topic_word(chain_of[k]);
    concepts.push_back(Concept{fmt::format("c{}", k), fmt::format("{} concept{}", topic, k),
                               fmt::format("{} {}", topic, filler(rng, 3))});
  }

  std::vector<Lecture> lectures;
  std::vector<Course> courses;
  for (std::size_t ci = 0; ci < cfg.num_courses; ++ci) {
    const auto& chain = chains[ci % chains.size()];
    const std::size_t chain_len = chain.size();
    const std::size_t min_seg = std::clamp<std::size_t>(cfg.min_segment, 1, chain_len);
    const std::size_t max_start = std::min<std::size_t>(2, chain_len - min_seg);
    const std::size_t seg_start = std::uniform_int_distribution<std::size_t>(0, max_start)(rng);
    const std::size_t seg_len = std::uniform_int_distribution<std::size_t>(min_seg, chain_len - seg_start)(rng);
    const std::size_t n = cfg.lectures_per_course;

    // Lecture t introduces the segment concept whose start position it reached;
    // earlier concepts persist with a probability that shrinks with depth.
    std::vector<std::size_t> starts(seg_len);
    for (std::size_t j = 0; j < seg_len; ++j) starts[j] = j * n / seg_len;
    Course course{fmt::format("C{}", ci), fmt::format("{} course {}", topic_word(chain_of[chain.front()]), ci), {}};
    std::vector<std::string> lecture_ids;
    for (std::size_t t = 0; t < n; ++t) {
      std::size_t current = 0;
      for (std::size_t j = 0; j < seg_len; ++j)
        if (starts[j] <= t) current = j;
      const std::size_t concept_idx = chain[seg_start + current];
      std::vector<std::string> tagged{concepts[concept_idx].id};
      for (std::size_t j = current; j-- > 0;) {
        const std::size_t earlier = chain[seg_start + j];
        const double persistence = 0.8 * (1.0 - static_cast<double>(depth_of[earlier]) / static_cast<double>(chain_len));
        if (unit(rng) < persistence && tagged.size() < cfg.max_concepts_per_lecture) {
          tagged.push_back(concepts[earlier].id);
        }
      }
      const std::string topic = topic_word(chain_of[concept_idx]);
      Lecture lec{fmt::format("L{}_{}", ci, t), fmt::format("{} concept{} lecture", topic, concept_idx),
                  filler(rng, 3), std::move(tagged)};
      lecture_ids.push_back(lec.id);
      lectures.push_back(std::move(lec));
    }
    const std::size_t mods = cfg.modules_per_course;
    for (std::size_t m = 0; m < mods; ++m) {
      Module mod{fmt::format("M{}_{}", ci, m), {}};
      for (std::size_t t = m * n / mods; t < (m + 1) * n / mods; ++t) mod.lecture_ids.push_back(lecture_ids[t]);
      course.modules.push_back(std::move(mod));
    }
    courses.push_back(std::move(course));
  }

  std::vector<InteractionLog> logs;
  if (cfg.num_courses > 0) {
    for (std::size_t u = 0; u < cfg.num_users; ++u) {
      const std::size_t ci = std::uniform_int_distribution<std::size_t>(0, cfg.num_courses - 1)(rng);
      const std::size_t n = cfg.lectures_per_course;
      const std::size_t start =
          unit(rng) < 0.7 ? 0 : std::uniform_int_distribution<std::size_t>(0, std::max<std::size_t>(n / 2, 1) - 1)(rng);
      const std::size_t len = std::uniform_int_distribution<std::size_t>(std::min<std::size_t>(2, n - start), n - start)(rng);
      std::vector<std::size_t> positions;
      for (std::size_t t = start; t < start + len; ++t) {
        if (unit(rng) < cfg.user_noise && t + 1 < start + len) ++t;  // skip one lecture
        positions.push_back(t);
      }
      for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
        if (unit(rng) < cfg.user_noise) std::swap(positions[i], positions[i + 1]);
      }
      if (positions.size() < 2) continue;
      InteractionLog log{fmt::format("u{}", u), {}};
      for (std::size_t p : positions) log.lecture_ids.push_back(fmt::format("L{}_{}", ci, p));
      logs.push_back(std::move(log));
    }
  }

  // Labels: ordered in-chain pairs are positive.
  std::vector<PrereqLabel> prereqs;
  std::set<std::pair<std::size_t, std::size_t>> related;
  for (const auto& chain : chains) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
      for (std::size_t j = i + 1; j < chain.size(); ++j) {
        prereqs.push_back(PrereqLabel{concepts[chain[i]].id, concepts[chain[j]].id, true});
        related.emplace(chain[i], chain[j]);
        related.emplace(chain[j], chain[i]);
      }
    }
  }
  const std::size_t positives = prereqs.size();
  std::vector<std::pair<std::size_t, std::size_t>> unrelated;
  for (std::size_t a = 0; a < cfg.num_concepts; ++a)
    for (std::size_t b = 0; b < cfg.num_concepts; ++b)
      if (a != b && !related.contains({a, b})) unrelated.emplace_back(a, b);
  std::shuffle(unrelated.begin(), unrelated.end(), rng);
  const std::size_t cross = std::min(positives / 2, unrelated.size());
  std::vector<std::size_t> order(positives);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < positives - cross; ++i) {
    const PrereqLabel& p = prereqs[order[i]];
    prereqs.push_back(PrereqLabel{p.concept_b, p.concept_a, false});
  }
  for (std::size_t i = 0; i < cross; ++i) {
    prereqs.push_back(PrereqLabel{concepts[unrelated[i].first].id, concepts[unrelated[i].second].id, false});
  }

  std::vector<std::vector<std::string>> chain_ids;
  for (const auto& chain : chains) {
    std::vector<std::string> ids;
    for (std::size_t k : chain) ids.push_back(concepts[k].id);
    chain_ids.push_back(std::move(ids));
  }

  return SyntheticData{Corpus::build(std::move(concepts), std::move(lectures), std::move(courses), std::move(logs)),
                       std::move(prereqs), std::move(chain_ids)};
}

}  // namespace moocrep
