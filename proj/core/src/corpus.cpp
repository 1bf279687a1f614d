#include "moocrep/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "moocrep/error.hpp"

namespace moocrep {

using nlohmann::json;

std::string Concept::text() const { return description.empty() ? name : name + "\n" + description; }

std::string Lecture::text() const { return description.empty() ? name : name + "\n" + description; }

namespace {

template <typename Map>
std::optional<std::size_t> lookup(const Map& map, std::string_view id) {
  auto it = map.find(std::string(id));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<std::size_t> Corpus::concept_index(std::string_view id) const { return lookup(concept_ids_, id); }
std::optional<std::size_t> Corpus::lecture_index(std::string_view id) const { return lookup(lecture_ids_, id); }
std::optional<std::size_t> Corpus::course_index(std::string_view id) const { return lookup(course_ids_, id); }

Corpus Corpus::build(std::vector<Concept> concepts, std::vector<Lecture> lectures, std::vector<Course> courses,
                     std::vector<InteractionLog> interactions, CorpusLimits limits) {
  Corpus c;
  c.limits_ = limits;

  // Entity ids double as keys in embedding files, so they must be unique
  // across concepts, lectures, modules and courses.
  std::unordered_map<std::string, std::string> seen;
  auto claim = [&seen](const std::string& id, const char* kind) {
    if (id.empty()) throw ValidationError(fmt::format("{} with an empty id", kind));
    auto [it, inserted] = seen.emplace(id, kind);
    if (!inserted) throw ValidationError(fmt::format("duplicate id '{}' ({} and {})", id, it->second, kind));
  };

  for (std::size_t i = 0; i < concepts.size(); ++i) {
    claim(concepts[i].id, "concept");
    if (concepts[i].name.empty()) throw ValidationError(fmt::format("concept '{}' has an empty name", concepts[i].id));
    c.concept_ids_.emplace(concepts[i].id, i);
  }
  c.lecture_concepts_.resize(lectures.size());
  for (std::size_t i = 0; i < lectures.size(); ++i) {
    const Lecture& lec = lectures[i];
    claim(lec.id, "lecture");
    c.lecture_ids_.emplace(lec.id, i);
    std::unordered_set<std::string_view> tagged;
    for (const std::string& cid : lec.concept_ids) {
      auto it = c.concept_ids_.find(cid);
      if (it == c.concept_ids_.end()) {
        throw ValidationError(fmt::format("lecture '{}' references missing concept '{}'", lec.id, cid));
      }
      if (!tagged.insert(cid).second) {
        throw ValidationError(fmt::format("lecture '{}' tags concept '{}' twice", lec.id, cid));
      }
      c.lecture_concepts_[i].push_back(it->second);
    }
  }

  constexpr std::size_t kUnowned = static_cast<std::size_t>(-1);
  c.lecture_course_.assign(lectures.size(), kUnowned);
  c.layouts_.resize(courses.size());
  for (std::size_t ci = 0; ci < courses.size(); ++ci) {
    const Course& course = courses[ci];
    claim(course.id, "course");
    c.course_ids_.emplace(course.id, ci);
    if (course.modules.empty()) throw ValidationError(fmt::format("course '{}' has no modules", course.id));
    if (course.modules.size() > limits.max_modules) {
      throw ValidationError(fmt::format("course '{}' has {} modules, limit is {}", course.id, course.modules.size(),
                                        limits.max_modules));
    }
    for (std::size_t mi = 0; mi < course.modules.size(); ++mi) {
      const Module& mod = course.modules[mi];
      claim(mod.id, "module");
      if (mod.lecture_ids.empty()) throw ValidationError(fmt::format("module '{}' has no lectures", mod.id));
      for (const std::string& lid : mod.lecture_ids) {
        auto it = c.lecture_ids_.find(lid);
        if (it == c.lecture_ids_.end()) {
          throw ValidationError(fmt::format("module '{}' references missing lecture '{}'", mod.id, lid));
        }
        if (c.lecture_course_[it->second] != kUnowned) {
          throw ValidationError(fmt::format("lecture '{}' belongs to more than one module", lid));
        }
        c.lecture_course_[it->second] = ci;
        c.layouts_[ci].push_back(LectureSlot{it->second, mi});
      }
    }
    if (c.layouts_[ci].size() > limits.max_lectures) {
      throw ValidationError(fmt::format("course '{}' has {} lectures, limit is {}", course.id, c.layouts_[ci].size(),
                                        limits.max_lectures));
    }
  }
  for (std::size_t i = 0; i < lectures.size(); ++i) {
    if (c.lecture_course_[i] == kUnowned) {
      throw ValidationError(fmt::format("lecture '{}' belongs to no module", lectures[i].id));
    }
  }

  for (const InteractionLog& log : interactions) {
    for (const std::string& lid : log.lecture_ids) {
      if (!c.lecture_ids_.contains(lid)) {
        throw ValidationError(fmt::format("interactions of user '{}' reference missing lecture '{}'", log.user_id, lid));
      }
    }
  }

  c.concepts_ = std::move(concepts);
  c.lectures_ = std::move(lectures);
  c.courses_ = std::move(courses);
  c.interactions_ = std::move(interactions);
  return c;
}

const std::vector<std::size_t>* OccurrenceIndex::find(std::size_t concept_index, std::size_t course) const {
  const auto& entries = by_concept_[concept_index];
  auto it = std::lower_bound(entries.begin(), entries.end(), course,
                             [](const CourseOccurrence& e, std::size_t c) { return e.course < c; });
  if (it == entries.end() || it->course != course) return nullptr;
  return &it->positions;
}

OccurrenceIndex occurrence_index(const Corpus& corpus) {
  std::vector<std::vector<CourseOccurrence>> by_concept(corpus.concepts().size());
  for (std::size_t ci = 0; ci < corpus.courses().size(); ++ci) {
    const auto layout = corpus.course_layout(ci);
    for (std::size_t pos = 0; pos < layout.size(); ++pos) {
      for (std::size_t concept_idx : corpus.lecture_concepts(layout[pos].lecture)) {
        auto& entries = by_concept[concept_idx];
        if (entries.empty() || entries.back().course != ci) entries.push_back(CourseOccurrence{ci, {}});
        entries.back().positions.push_back(pos);
      }
    }
  }
  return OccurrenceIndex(std::move(by_concept));
}

CorpusStats summarize(const Corpus& corpus) {
  CorpusStats s;
  s.concepts = corpus.concepts().size();
  s.courses = corpus.courses().size();
  s.lectures = corpus.lectures().size();
  if (s.courses > 0) {
    std::size_t lecture_total = 0;
    std::size_t concept_total = 0;
    for (std::size_t ci = 0; ci < s.courses; ++ci) {
      const auto layout = corpus.course_layout(ci);
      lecture_total += layout.size();
      std::set<std::size_t> distinct;
      for (const LectureSlot& slot : layout) {
        const auto tagged = corpus.lecture_concepts(slot.lecture);
        distinct.insert(tagged.begin(), tagged.end());
      }
      concept_total += distinct.size();
    }
    s.lectures_per_course = static_cast<double>(lecture_total) / static_cast<double>(s.courses);
    s.concepts_per_course = static_cast<double>(concept_total) / static_cast<double>(s.courses);
  }
  if (s.lectures > 0) {
    std::size_t tags = 0;
    for (std::size_t li = 0; li < s.lectures; ++li) tags += corpus.lecture_concepts(li).size();
    s.concepts_per_lecture = static_cast<double>(tags) / static_cast<double>(s.lectures);
  }
  s.users = corpus.interactions().size();
  if (s.users > 0) {
    std::size_t events = 0;
    for (const auto& log : corpus.interactions()) events += log.lecture_ids.size();
    s.interactions_per_user = static_cast<double>(events) / static_cast<double>(s.users);
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSONL I/O

namespace {

void for_each_record(const std::filesystem::path& file, const std::function<void(const json&)>& handle) {
  std::ifstream in(file);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", file.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      handle(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(fmt::format("{}:{}: parse error: {}", file.string(), line_no, e.what()));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", file.string(), line_no, e.what()));
    }
  }
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) throw ValidationError(fmt::format("missing string field '{}'", key));
  return j.at(key).get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return j.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw ValidationError(fmt::format("missing list field '{}'", key));
    return {};
  }
  return j.at(key).get<std::vector<std::string>>();
}

void write_lines(const std::filesystem::path& file, const std::vector<json>& records) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", file.string()));
  for (const json& r : records) out << r.dump() << '\n';
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir, CorpusLimits limits) {
  std::vector<Concept> concepts;
  for_each_record(dir / "concepts.jsonl", [&](const json& j) {
    concepts.push_back(Concept{required_string(j, "id"), required_string(j, "name"), optional_string(j, "description")});
  });
  std::vector<Lecture> lectures;
  for_each_record(dir / "lectures.jsonl", [&](const json& j) {
    lectures.push_back(Lecture{required_string(j, "id"), optional_string(j, "name"), optional_string(j, "description"),
                               string_list(j, "concept_ids", false)});
  });
  std::vector<Course> courses;
  for_each_record(dir / "courses.jsonl", [&](const json& j) {
    Course c{required_string(j, "id"), optional_string(j, "name"), {}};
    if (!j.contains("modules") || !j.at("modules").is_array()) throw ValidationError("missing list field 'modules'");
    for (const json& m : j.at("modules")) c.modules.push_back(Module{required_string(m, "id"), string_list(m, "lecture_ids", true)});
    courses.push_back(std::move(c));
  });
  std::vector<InteractionLog> interactions;
  if (std::filesystem::exists(dir / "interactions.jsonl")) {
    for_each_record(dir / "interactions.jsonl", [&](const json& j) {
      interactions.push_back(InteractionLog{required_string(j, "user_id"), string_list(j, "lecture_ids", true)});
    });
  }
  return Corpus::build(std::move(concepts), std::move(lectures), std::move(courses), std::move(interactions), limits);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<json> rows;
  for (const Concept& c : corpus.concepts()) rows.push_back({{"id", c.id}, {"name", c.name}, {"description", c.description}});
  write_lines(dir / "concepts.jsonl", rows);

  rows.clear();
  for (const Lecture& l : corpus.lectures()) {
    rows.push_back({{"id", l.id}, {"name", l.name}, {"description", l.description}, {"concept_ids", l.concept_ids}});
  }
  write_lines(dir / "lectures.jsonl", rows);

  rows.clear();
  for (const Course& c : corpus.courses()) {
    json modules = json::array();
    for (const Module& m : c.modules) modules.push_back({{"id", m.id}, {"lecture_ids", m.lecture_ids}});
    rows.push_back({{"id", c.id}, {"name", c.name}, {"modules", std::move(modules)}});
  }
  write_lines(dir / "courses.jsonl", rows);

  rows.clear();
  for (const InteractionLog& log : corpus.interactions()) {
    rows.push_back({{"user_id", log.user_id}, {"lecture_ids", log.lecture_ids}});
  }
  write_lines(dir / "interactions.jsonl", rows);
}

std::vector<PrereqLabel> load_prereqs(const std::filesystem::path& file, const Corpus& corpus) {
  std::vector<PrereqLabel> labels;
  for_each_record(file, [&](const json& j) {
    PrereqLabel p{required_string(j, "a"), required_string(j, "b"), false};
    if (!j.contains("label") || !j.at("label").is_boolean()) throw ValidationError("missing boolean field 'label'");
    p.label = j.at("label").get<bool>();
    if (p.concept_a == p.concept_b) throw ValidationError(fmt::format("prerequisite pair of '{}' with itself", p.concept_a));
    for (const auto& id : {p.concept_a, p.concept_b}) {
      if (!corpus.concept_index(id)) throw ValidationError(fmt::format("prerequisite references missing concept '{}'", id));
    }
    labels.push_back(std::move(p));
  });
  return labels;
}

void save_prereqs(std::span<const PrereqLabel> labels, const std::filesystem::path& file) {
  std::vector<json> rows;
  for (const PrereqLabel& p : labels) rows.push_back({{"a", p.concept_a}, {"b", p.concept_b}, {"label", p.label}});
  write_lines(file, rows);
}

}  // namespace moocrep
