#pragma once

#include <string>
#include <vector>

#include "moocrep/corpus.hpp"

namespace moocrep::toy {

/// Twenty entities: six concepts, two courses of two three-lecture modules.
/// Lecture i of course z is about concept 3z + (i mod 3), so every concept
/// tags two lectures of one course.
inline Corpus corpus() {
  const std::vector<std::string> names{"sets", "relations", "functions", "limits", "series", "integrals"};
  std::vector<Concept> concepts;
  for (std::size_t c = 0; c < names.size(); ++c) concepts.push_back({"k" + std::to_string(c), names[c], ""});
  std::vector<Lecture> lectures;
  std::vector<Course> courses;
  for (std::size_t z = 0; z < 2; ++z) {
    Course course{"course" + std::to_string(z), z == 0 ? "discrete structures" : "analysis", {}};
    for (std::size_t m = 0; m < 2; ++m) {
      Module module{course.id + ".m" + std::to_string(m), {}};
      for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t i = 3 * m + j;
        const std::size_t c = 3 * z + i % 3;
        Lecture lec{course.id + ".l" + std::to_string(i), names[c] + " part " + std::to_string(m + 1),
                    "worked examples on " + names[c], {concepts[c].id}};
        module.lecture_ids.push_back(lec.id);
        lectures.push_back(std::move(lec));
      }
      course.modules.push_back(std::move(module));
    }
    courses.push_back(std::move(course));
  }
  return Corpus::build(std::move(concepts), std::move(lectures), std::move(courses));
}

}  // namespace moocrep::toy
