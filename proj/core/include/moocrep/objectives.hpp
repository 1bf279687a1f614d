#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moocrep/autodiff.hpp"
#include "moocrep/corpus.hpp"
#include "moocrep/graph.hpp"

namespace moocrep {

/// a.b / (|a||b|). Throws NumericError if either norm is below 1e-12.
double cosine(std::span<const double> a, std::span<const double> b);

/// Trainable rows for the leaf entities (concepts and lectures), one d-vector each.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> ids, Tensor rows);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const { return rows_.value.cols(); }
  std::span<const std::string> ids() const noexcept { return ids_; }
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index(std::string_view id) const;  // throws ValidationError when absent

  Parameter& rows() noexcept { return rows_; }
  const Parameter& rows() const noexcept { return rows_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  Parameter rows_;
};

struct ComplexityRecord {
  std::string concept_id;
  std::size_t concept_index = 0;
  double alc = 0.0;  // average lecture coverage
  double ast = 0.0;  // average survival time
  double d = 0.0;    // (alc + ast) / 2

  friend bool operator==(const ComplexityRecord&, const ComplexityRecord&) = default;
};

/// Per concept: alc = mean over its courses of |I| / |z|, ast = mean of
/// (max I - min I + 1) / |z|, d = (alc + ast) / 2, where I are the occurrence
/// positions in course z. Concepts that occur in no course get no record.
std::vector<ComplexityRecord> compute_complexity(const OccurrenceIndex& index, const Corpus& corpus);

/// TSV "concept_id\talc\tast\td" with shortest round-trip decimals.
void write_complexity(std::span<const ComplexityRecord> records, const std::filesystem::path& path);

/// Linear map from an embedding to a complexity estimate: w . e + b.
struct ComplexityHead {
  Parameter weight;  // d x 1
  Parameter bias;    // 1 x 1

  ComplexityHead() = default;
  ComplexityHead(std::size_t dim, std::mt19937_64& rng);
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }
};

enum class Reduction { Sum, Mean };

struct LossWeights {
  double margin = 0.5;    // hinge margin
  double tradeoff = 0.5;  // weight of the graph loss; (1 - tradeoff) weighs the complexity loss

  void validate() const;
};

/// One positive oriented edge with its corrupted destinations.
struct TripletSample {
  OrientedEdge positive;
  std::vector<std::size_t> corrupt_dsts;
};

/// Returns the 1 x d embedding of a graph vertex on the current tape.
using VertexLookup = std::function<Var(std::size_t vertex)>;

/// Sum over samples and corruptions of max(f(e') - f(e) + margin, 0), f = cosine.
/// Returns a 1 x 1 zero constant when there is nothing to sum.
Var triplet_loss(Tape& tape, std::span<const TripletSample> samples, const VertexLookup& lookup, double margin);

/// Hinge term for precomputed similarities.
double triplet_term(double positive_similarity, double negative_similarity, double margin);

/// Table row of each record's concept. Throws ValidationError naming the
/// first concept without an embedding.
std::vector<std::size_t> record_rows(std::span<const ComplexityRecord> records, const EmbeddingTable& table);

/// Sum (or mean) over records of (d_i - (w . e_i + b))^2, where e_i is row
/// table_rows[i] of the bound embedding table `rows`. Zero for no records.
Var complexity_loss(Tape& tape, std::span<const ComplexityRecord> records, Var rows,
                    std::span<const std::size_t> table_rows, Var head_weight, Var head_bias,
                    Reduction reduction = Reduction::Sum);

/// tradeoff * graph + (1 - tradeoff) * complexity. Throws ValidationError if
/// tradeoff is outside [0, 1].
Var combined_loss(Var graph_loss, Var complexity, double tradeoff);
double combined_loss(double graph_loss, double complexity, double tradeoff);

}  // namespace moocrep
