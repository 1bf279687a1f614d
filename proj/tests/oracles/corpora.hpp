#pragma once

// Corpus builders shared by the unit and acceptance tests.

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "moocrep/corpus.hpp"

namespace moocrep::testing {

/// Lectures "<course>.l<i>" grouped into modules of the given sizes; tags are
/// concept ids per lecture in flattened order.
struct CourseSpec {
  std::string id;
  std::vector<std::size_t> module_sizes;
  std::vector<std::vector<std::string>> tags;
};

inline Corpus make_corpus(const std::vector<std::string>& concept_ids, const std::vector<CourseSpec>& specs,
                          std::vector<InteractionLog> logs = {}) {
  std::vector<Concept> concepts;
  for (const auto& id : concept_ids) concepts.push_back({id, "concept " + id, ""});
  std::vector<Lecture> lectures;
  std::vector<Course> courses;
  for (const CourseSpec& spec : specs) {
    Course course{spec.id, "course " + spec.id, {}};
    std::size_t flat = 0;
    for (std::size_t m = 0; m < spec.module_sizes.size(); ++m) {
      Module module{spec.id + ".m" + std::to_string(m), {}};
      for (std::size_t i = 0; i < spec.module_sizes[m]; ++i, ++flat) {
        Lecture lec{spec.id + ".l" + std::to_string(flat), "lecture " + std::to_string(flat), "", {}};
        if (flat < spec.tags.size()) lec.concept_ids = spec.tags[flat];
        module.lecture_ids.push_back(lec.id);
        lectures.push_back(std::move(lec));
      }
      course.modules.push_back(std::move(module));
    }
    courses.push_back(std::move(course));
  }
  return Corpus::build(std::move(concepts), std::move(lectures), std::move(courses), std::move(logs));
}

/// Random corpus: up to `max_courses` courses of 1..3 modules with 1..4
/// lectures each; every lecture tags a random subset of the concepts.
inline Corpus random_corpus(std::mt19937_64& rng, std::size_t max_courses = 10, std::size_t num_concepts = 8) {
  std::uniform_int_distribution<std::size_t> courses_dist(1, max_courses);
  std::uniform_int_distribution<std::size_t> modules_dist(1, 3);
  std::uniform_int_distribution<std::size_t> lectures_dist(1, 4);
  std::bernoulli_distribution tag(0.3);
  std::vector<std::string> concept_ids;
  for (std::size_t i = 0; i < num_concepts; ++i) concept_ids.push_back("c" + std::to_string(i));
  std::vector<CourseSpec> specs;
  const std::size_t n = courses_dist(rng);
  for (std::size_t c = 0; c < n; ++c) {
    CourseSpec spec{"z" + std::to_string(c), {}, {}};
    const std::size_t modules = modules_dist(rng);
    std::size_t total = 0;
    for (std::size_t m = 0; m < modules; ++m) {
      spec.module_sizes.push_back(lectures_dist(rng));
      total += spec.module_sizes.back();
    }
    for (std::size_t i = 0; i < total; ++i) {
      std::vector<std::string> tags;
      for (const auto& id : concept_ids)
        if (tag(rng)) tags.push_back(id);
      spec.tags.push_back(std::move(tags));
    }
    specs.push_back(std::move(spec));
  }
  return make_corpus(concept_ids, specs);
}

}  // namespace moocrep::testing
