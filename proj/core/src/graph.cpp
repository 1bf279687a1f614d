#include "moocrep/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

std::string_view to_string(VertexType type) {
  switch (type) {
    case VertexType::Concept: return "concept";
    case VertexType::Lecture: return "lecture";
    case VertexType::Course: return "course";
  }
  return "?";
}

std::string_view to_string(EdgeType type) {
  switch (type) {
    case EdgeType::LectureConcept: return "lecture-concept";
    case EdgeType::CourseConcept: return "course-concept";
    case EdgeType::ConceptConcept: return "concept-concept";
    case EdgeType::LectureLecture: return "lecture-lecture";
    case EdgeType::CourseCourse: return "course-course";
  }
  return "?";
}

VertexType parse_vertex_type(std::string_view text) {
  for (auto t : {VertexType::Concept, VertexType::Lecture, VertexType::Course})
    if (to_string(t) == text) return t;
  throw ValidationError(fmt::format("unknown vertex type '{}'", text));
}

EdgeType parse_edge_type(std::string_view text) {
  for (auto t : {EdgeType::LectureConcept, EdgeType::CourseConcept, EdgeType::ConceptConcept, EdgeType::LectureLecture,
                 EdgeType::CourseCourse})
    if (to_string(t) == text) return t;
  throw ValidationError(fmt::format("unknown edge type '{}'", text));
}

bool is_implicit(EdgeType type) {
  return type == EdgeType::ConceptConcept || type == EdgeType::LectureLecture || type == EdgeType::CourseCourse;
}

namespace {

// Endpoint types an edge type connects, unordered.
std::pair<VertexType, VertexType> endpoint_types(EdgeType type) {
  switch (type) {
    case EdgeType::LectureConcept: return {VertexType::Lecture, VertexType::Concept};
    case EdgeType::CourseConcept: return {VertexType::Course, VertexType::Concept};
    case EdgeType::ConceptConcept: return {VertexType::Concept, VertexType::Concept};
    case EdgeType::LectureLecture: return {VertexType::Lecture, VertexType::Lecture};
    case EdgeType::CourseCourse: return {VertexType::Course, VertexType::Course};
  }
  throw ValidationError("bad edge type");
}

EdgeType implicit_type(VertexType type) {
  switch (type) {
    case VertexType::Concept: return EdgeType::ConceptConcept;
    case VertexType::Lecture: return EdgeType::LectureLecture;
    case VertexType::Course: return EdgeType::CourseCourse;
  }
  throw ValidationError("bad vertex type");
}

}  // namespace

std::uint64_t RelationGraph::key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

std::string RelationGraph::vertex_key(std::string_view id, VertexType type) {
  std::string k(1, static_cast<char>('0' + static_cast<int>(type)));
  k.append(id);
  return k;
}

std::size_t RelationGraph::add_vertex(std::string id, VertexType type) {
  const std::string k = vertex_key(id, type);
  if (vertex_index_.contains(k)) throw ValidationError(fmt::format("duplicate {} vertex '{}'", to_string(type), id));
  const std::size_t v = vertices_.size();
  vertex_index_.emplace(k, v);
  vertices_.push_back(Vertex{std::move(id), type});
  by_type_[static_cast<std::size_t>(type)].push_back(v);
  adjacency_.emplace_back();
  return v;
}

bool RelationGraph::add_edge(std::size_t a, std::size_t b, EdgeType type) {
  if (a >= vertices_.size() || b >= vertices_.size()) throw ValidationError("edge endpoint out of range");
  if (a == b) throw ValidationError(fmt::format("self-loop on '{}'", vertices_[a].id));
  const auto [t1, t2] = endpoint_types(type);
  const VertexType ta = vertices_[a].type;
  const VertexType tb = vertices_[b].type;
  if (!((ta == t1 && tb == t2) || (ta == t2 && tb == t1))) {
    throw ValidationError(fmt::format("{} edge cannot join {} '{}' and {} '{}'", to_string(type), to_string(ta),
                                      vertices_[a].id, to_string(tb), vertices_[b].id));
  }
  const std::uint64_t k = key(a, b);
  if (edge_index_.contains(k)) return false;
  edge_index_.emplace(k, edges_.size());
  edges_.push_back(Edge{std::min(a, b), std::max(a, b), type});
  auto insert_sorted = [](std::vector<std::size_t>& list, std::size_t v) {
    list.insert(std::lower_bound(list.begin(), list.end(), v), v);
  };
  insert_sorted(adjacency_[a], b);
  insert_sorted(adjacency_[b], a);
  return true;
}

std::optional<std::size_t> RelationGraph::find_vertex(std::string_view id, VertexType type) const {
  auto it = vertex_index_.find(vertex_key(id, type));
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

bool RelationGraph::has_edge(std::size_t a, std::size_t b) const { return edge_index_.contains(key(a, b)); }

std::optional<Edge> RelationGraph::find_edge(std::size_t a, std::size_t b) const {
  auto it = edge_index_.find(key(a, b));
  if (it == edge_index_.end()) return std::nullopt;
  return edges_[it->second];
}

RelationGraph vertices_from_corpus(const Corpus& corpus) {
  RelationGraph g;
  for (const Concept& c : corpus.concepts()) g.add_vertex(c.id, VertexType::Concept);
  for (const Lecture& l : corpus.lectures()) g.add_vertex(l.id, VertexType::Lecture);
  for (const Course& c : corpus.courses()) g.add_vertex(c.id, VertexType::Course);
  return g;
}

RelationGraph build_explicit(const Corpus& corpus) {
  RelationGraph g = vertices_from_corpus(corpus);
  const std::size_t lecture_base = corpus.concepts().size();
  const std::size_t course_base = lecture_base + corpus.lectures().size();
  for (std::size_t li = 0; li < corpus.lectures().size(); ++li) {
    for (std::size_t ci : corpus.lecture_concepts(li)) g.add_edge(lecture_base + li, ci, EdgeType::LectureConcept);
  }
  for (std::size_t course = 0; course < corpus.courses().size(); ++course) {
    for (const LectureSlot& slot : corpus.course_layout(course)) {
      for (std::size_t ci : corpus.lecture_concepts(slot.lecture)) {
        g.add_edge(course_base + course, ci, EdgeType::CourseConcept);
      }
    }
  }
  return g;
}

RelationGraph induce_implicit(const RelationGraph& graph, std::size_t threshold) {
  if (threshold < 1) throw ValidationError("implicit-edge threshold must be at least 1");
  const std::size_t n = graph.vertices().size();
  // Explicit adjacency only, so repeated application sees the same counts.
  std::vector<std::vector<std::size_t>> explicit_adj(n);
  for (const Edge& e : graph.edges()) {
    if (is_implicit(e.type)) continue;
    explicit_adj[e.src].push_back(e.dst);
    explicit_adj[e.dst].push_back(e.src);
  }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> shared;
  for (std::size_t w = 0; w < n; ++w) {
    auto& nb = explicit_adj[w];
    std::sort(nb.begin(), nb.end());
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        if (graph.vertices()[nb[i]].type == graph.vertices()[nb[j]].type) ++shared[{nb[i], nb[j]}];
      }
    }
  }
  RelationGraph out = graph;
  for (const auto& [pair, count] : shared) {
    if (count >= threshold) out.add_edge(pair.first, pair.second, implicit_type(graph.vertices()[pair.first].type));
  }
  return out;
}

namespace {

std::vector<std::size_t> eligible_corruptions(const RelationGraph& graph, OrientedEdge e) {
  const VertexType type = graph.vertices()[e.dst].type;
  std::vector<std::size_t> out;
  for (std::size_t cand : graph.vertices_of(type)) {
    if (cand == e.dst || cand == e.src || graph.has_edge(e.src, cand)) continue;
    out.push_back(cand);
  }
  return out;
}

}  // namespace

std::size_t count_corruptions(const RelationGraph& graph, OrientedEdge e) {
  return eligible_corruptions(graph, e).size();
}

NegativeSampling sample_negatives(const RelationGraph& graph, OrientedEdge e, std::size_t k, std::mt19937_64& rng) {
  if (!graph.has_edge(e.src, e.dst)) {
    throw ValidationError(fmt::format("cannot corrupt non-edge ({}, {})", graph.vertices()[e.src].id,
                                      graph.vertices()[e.dst].id));
  }
  std::vector<std::size_t> pool = eligible_corruptions(graph, e);
  NegativeSampling result;
  if (pool.empty()) {
    result.starved = true;
    return result;
  }
  const std::size_t take = std::min(k, pool.size());
  // Partial Fisher-Yates: the first `take` slots become a uniform sample.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, pool.size() - 1)(rng);
    std::swap(pool[i], pool[j]);
    result.samples.push_back(NegativeSample{e.src, pool[i]});
  }
  return result;
}

void write_edge_list(const RelationGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  for (const Edge& e : graph.edges()) {
    const Vertex& s = graph.vertices()[e.src];
    const Vertex& d = graph.vertices()[e.dst];
    out << s.id << '\t' << to_string(s.type) << '\t' << d.id << '\t' << to_string(d.type) << '\t' << to_string(e.type)
        << '\n';
  }
}

RelationGraph read_edge_list(const Corpus& corpus, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  RelationGraph g = vertices_from_corpus(corpus);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      fields.push_back(line.substr(start, tab - start));
    }
    fields.push_back(line.substr(start));
    try {
      if (fields.size() != 5) throw ValidationError(fmt::format("expected 5 fields, got {}", fields.size()));
      auto src = g.find_vertex(fields[0], parse_vertex_type(fields[1]));
      auto dst = g.find_vertex(fields[2], parse_vertex_type(fields[3]));
      if (!src || !dst) throw ValidationError("edge references an entity missing from the corpus");
      g.add_edge(*src, *dst, parse_edge_type(fields[4]));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return g;
}

}  // namespace moocrep
