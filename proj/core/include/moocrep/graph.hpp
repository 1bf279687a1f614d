#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "moocrep/corpus.hpp"

namespace moocrep {

enum class VertexType : std::uint8_t { Concept, Lecture, Course };

enum class EdgeType : std::uint8_t { LectureConcept, CourseConcept, ConceptConcept, LectureLecture, CourseCourse };

std::string_view to_string(VertexType type);
std::string_view to_string(EdgeType type);
VertexType parse_vertex_type(std::string_view text);
EdgeType parse_edge_type(std::string_view text);
bool is_implicit(EdgeType type);

struct Vertex {
  std::string id;
  VertexType type;
};

/// Undirected edge between vertex indices, stored with src < dst.
struct Edge {
  std::size_t src;
  std::size_t dst;
  EdgeType type;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// A directed view of an edge: (source, destination) as presented to the
/// graph loss. Only the destination is corrupted.
struct OrientedEdge {
  std::size_t src;
  std::size_t dst;
};

struct NegativeSample {
  std::size_t src;
  std::size_t dst_corrupt;

  friend bool operator==(const NegativeSample&, const NegativeSample&) = default;
};

struct NegativeSampling {
  std::vector<NegativeSample> samples;
  bool starved = false;  // no eligible corruption existed
};

/// Typed entity graph with explicit (lecture-concept, course-concept) and
/// implicit (same-type) edges. Vertices are numbered concepts first, then
/// lectures, then courses, each in corpus order when built from a corpus.
class RelationGraph {
 public:
  std::size_t add_vertex(std::string id, VertexType type);
  /// Validates endpoint types against the edge type and rejects self-loops.
  /// Returns false if the edge already exists.
  bool add_edge(std::size_t a, std::size_t b, EdgeType type);

  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const std::size_t> vertices_of(VertexType type) const { return by_type_[static_cast<std::size_t>(type)]; }
  /// Sorted neighbor list of a vertex.
  std::span<const std::size_t> neighbors(std::size_t v) const { return adjacency_[v]; }

  std::optional<std::size_t> find_vertex(std::string_view id, VertexType type) const;
  bool has_edge(std::size_t a, std::size_t b) const;
  /// Edge between a and b in either order.
  std::optional<Edge> find_edge(std::size_t a, std::size_t b) const;

  friend bool operator==(const RelationGraph& a, const RelationGraph& b) {
    return a.edges_ == b.edges_ && a.vertices_.size() == b.vertices_.size();
  }

 private:
  static std::uint64_t key(std::size_t a, std::size_t b);
  static std::string vertex_key(std::string_view id, VertexType type);

  std::vector<Vertex> vertices_;
  std::vector<std::vector<std::size_t>> by_type_{3};
  std::unordered_map<std::string, std::size_t> vertex_index_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Lecture-concept edge per tagging and one course-concept edge per
/// (course, concept) pair where the concept tags at least one lecture of the course.
RelationGraph build_explicit(const Corpus& corpus);

/// Adds a same-type edge between every pair of vertices whose shared-neighbor
/// count over explicit edges is at least `threshold`. Existing edges are kept.
/// Throws ValidationError if threshold < 1.
RelationGraph induce_implicit(const RelationGraph& graph, std::size_t threshold);

/// Draws up to k corruptions (src, d') uniformly without replacement, where d'
/// has the type of e.dst, d' != e.dst, d' != e.src and (src, d') is not an edge.
NegativeSampling sample_negatives(const RelationGraph& graph, OrientedEdge e, std::size_t k, std::mt19937_64& rng);

/// Number of eligible corruptions for an oriented edge.
std::size_t count_corruptions(const RelationGraph& graph, OrientedEdge e);

/// Edge list TSV: "src_id\tsrc_type\tdst_id\tdst_type\tetype" per line.
void write_edge_list(const RelationGraph& graph, const std::filesystem::path& path);
/// Reads an edge list against the vertex set of `corpus`.
RelationGraph read_edge_list(const Corpus& corpus, const std::filesystem::path& path);

/// Graph with every corpus entity as a vertex and no edges.
RelationGraph vertices_from_corpus(const Corpus& corpus);

}  // namespace moocrep
