#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace moocrep {

struct Concept {
  std::string id;
  std::string name;
  std::string description;

  /// Text handed to a text encoder: name plus description (name alone when
  /// the description is absent).
  std::string text() const;

  friend bool operator==(const Concept&, const Concept&) = default;
};

struct Lecture {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> concept_ids;

  std::string text() const;

  friend bool operator==(const Lecture&, const Lecture&) = default;
};

struct Module {
  std::string id;
  std::vector<std::string> lecture_ids;

  friend bool operator==(const Module&, const Module&) = default;
};

struct Course {
  std::string id;
  std::string name;
  std::vector<Module> modules;

  friend bool operator==(const Course&, const Course&) = default;
};

struct InteractionLog {
  std::string user_id;
  std::vector<std::string> lecture_ids;

  friend bool operator==(const InteractionLog&, const InteractionLog&) = default;
};

struct PrereqLabel {
  std::string concept_a;
  std::string concept_b;
  bool label = false;  // true when concept_a is a prerequisite of concept_b

  friend bool operator==(const PrereqLabel&, const PrereqLabel&) = default;
};

struct CorpusLimits {
  std::size_t max_lectures = 510;  // per course
  std::size_t max_modules = 65;    // per course
};

/// One lecture of a course in module-flattened order.
struct LectureSlot {
  std::size_t lecture;  // index into Corpus::lectures()
  std::size_t module;   // 0-based module position within the course
};

/// Immutable, validated, cross-referenced MOOC corpus.
class Corpus {
 public:
  /// Validates every invariant and builds the lookup tables. Throws
  /// ValidationError on duplicate ids, dangling references, empty modules or
  /// courses, lectures outside exactly one module, or courses over the limits.
  static Corpus build(std::vector<Concept> concepts, std::vector<Lecture> lectures, std::vector<Course> courses,
                      std::vector<InteractionLog> interactions = {}, CorpusLimits limits = {});

  std::span<const Concept> concepts() const noexcept { return concepts_; }
  std::span<const Lecture> lectures() const noexcept { return lectures_; }
  std::span<const Course> courses() const noexcept { return courses_; }
  std::span<const InteractionLog> interactions() const noexcept { return interactions_; }
  const CorpusLimits& limits() const noexcept { return limits_; }

  std::optional<std::size_t> concept_index(std::string_view id) const;
  std::optional<std::size_t> lecture_index(std::string_view id) const;
  std::optional<std::size_t> course_index(std::string_view id) const;

  /// Lectures of a course flattened in module order, then lecture order.
  std::span<const LectureSlot> course_layout(std::size_t course) const { return layouts_[course]; }
  /// Concept indices tagged on a lecture, in file order.
  std::span<const std::size_t> lecture_concepts(std::size_t lecture) const { return lecture_concepts_[lecture]; }
  /// Course that owns a lecture.
  std::size_t lecture_course(std::size_t lecture) const { return lecture_course_[lecture]; }

 private:
  Corpus() = default;

  std::vector<Concept> concepts_;
  std::vector<Lecture> lectures_;
  std::vector<Course> courses_;
  std::vector<InteractionLog> interactions_;
  CorpusLimits limits_;

  std::unordered_map<std::string, std::size_t> concept_ids_;
  std::unordered_map<std::string, std::size_t> lecture_ids_;
  std::unordered_map<std::string, std::size_t> course_ids_;
  std::vector<std::vector<LectureSlot>> layouts_;
  std::vector<std::vector<std::size_t>> lecture_concepts_;
  std::vector<std::size_t> lecture_course_;
};

/// Positions (0-based, module-flattened) of the lectures of one course that a
/// concept tags. Positions are strictly increasing.
struct CourseOccurrence {
  std::size_t course;
  std::vector<std::size_t> positions;

  friend bool operator==(const CourseOccurrence&, const CourseOccurrence&) = default;
};

/// For every concept, the courses it occurs in (sorted by course index) with
/// the positions of its lectures. Courses where it never occurs are absent.
class OccurrenceIndex {
 public:
  explicit OccurrenceIndex(std::vector<std::vector<CourseOccurrence>> by_concept)
      : by_concept_(std::move(by_concept)) {}

  std::span<const CourseOccurrence> of(std::size_t concept_index) const { return by_concept_[concept_index]; }
  std::size_t concept_count() const noexcept { return by_concept_.size(); }

  /// Positions for one (concept, course) pair, or nullptr if there is no entry.
  const std::vector<std::size_t>* find(std::size_t concept_index, std::size_t course) const;

 private:
  std::vector<std::vector<CourseOccurrence>> by_concept_;
};

OccurrenceIndex occurrence_index(const Corpus& corpus);

struct CorpusStats {
  std::size_t concepts = 0;
  std::size_t courses = 0;
  std::size_t lectures = 0;
  double lectures_per_course = 0.0;
  double concepts_per_course = 0.0;   // distinct concepts tagged in a course
  double concepts_per_lecture = 0.0;
  std::size_t users = 0;
  std::optional<double> interactions_per_user;  // absent when there are no users
};

CorpusStats summarize(const Corpus& corpus);

// Line-delimited JSON record files, one record per line:
//   concepts.jsonl      {"id", "name", "description"}
//   lectures.jsonl      {"id", "name", "description", "concept_ids"}
//   courses.jsonl       {"id", "name", "modules": [{"id", "lecture_ids"}]}
//   interactions.jsonl  {"user_id", "lecture_ids"}          (optional file)
//   prereqs.jsonl       {"a", "b", "label"}                 (read separately)

Corpus load_corpus(const std::filesystem::path& dir, CorpusLimits limits = {});
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

std::vector<PrereqLabel> load_prereqs(const std::filesystem::path& file, const Corpus& corpus);
void save_prereqs(std::span<const PrereqLabel> labels, const std::filesystem::path& file);

}  // namespace moocrep
