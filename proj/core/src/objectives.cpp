#include "moocrep/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine: length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  if (na < 1e-12 || nb < 1e-12) throw NumericError("cosine of a degenerate (near-zero) vector");
  return ab / (na * nb);
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> ids, Tensor rows)
    : ids_(std::move(ids)), rows_("table.rows", std::move(rows)) {
  if (rows_.value.rows() != ids_.size()) throw ShapeError("embedding table: id count does not match row count");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw ValidationError(fmt::format("duplicate table id '{}'", ids_[i]));
  }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingTable::index(std::string_view id) const {
  auto i = find(id);
  if (!i) throw ValidationError(fmt::format("no embedding row for '{}'", id));
  return *i;
}

std::vector<ComplexityRecord> compute_complexity(const OccurrenceIndex& index, const Corpus& corpus) {
  std::vector<ComplexityRecord> records;
  for (std::size_t ci = 0; ci < index.concept_count(); ++ci) {
    const auto occurrences = index.of(ci);
    if (occurrences.empty()) continue;
    double alc = 0.0;
    double ast = 0.0;
    for (const CourseOccurrence& occ : occurrences) {
      const double len = static_cast<double>(corpus.course_layout(occ.course).size());
      alc += static_cast<double>(occ.positions.size()) / len;
      ast += static_cast<double>(occ.positions.back() - occ.positions.front() + 1) / len;
    }
    const double courses = static_cast<double>(occurrences.size());
    alc /= courses;
    ast /= courses;
    records.push_back(ComplexityRecord{corpus.concepts()[ci].id, ci, alc, ast, (alc + ast) / 2.0});
  }
  return records;
}

void write_complexity(std::span<const ComplexityRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  for (const ComplexityRecord& r : records) out << fmt::format("{}\t{}\t{}\t{}\n", r.concept_id, r.alc, r.ast, r.d);
}

ComplexityHead::ComplexityHead(std::size_t dim, std::mt19937_64& rng)
    : weight("head.weight", Tensor::zeros(dim, 1)), bias("head.bias", Tensor::zeros(1, 1)) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : weight.value.data()) v = dist(rng);
}

void LossWeights::validate() const {
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw ValidationError("margin must be a non-negative number");
  if (!(tradeoff >= 0.0 && tradeoff <= 1.0)) throw ValidationError(fmt::format("tradeoff {} is outside [0, 1]", tradeoff));
}

double triplet_term(double positive_similarity, double negative_similarity, double margin) {
  return std::max(negative_similarity - positive_similarity + margin, 0.0);
}

Var triplet_loss(Tape& tape, std::span<const TripletSample> samples, const VertexLookup& lookup, double margin) {
  std::vector<Var> terms;
  for (const TripletSample& s : samples) {
    if (s.corrupt_dsts.empty()) continue;
    Var src = lookup(s.positive.src);
    Var positive = cosine(src, lookup(s.positive.dst));
    for (std::size_t corrupt : s.corrupt_dsts) {
      Var negative = cosine(src, lookup(corrupt));
      terms.push_back(hinge(add_scalar(sub(negative, positive), margin)));
    }
  }
  if (terms.empty()) return tape.constant(Tensor::scalar(0.0));
  return sum(concat_rows(terms));
}

std::vector<std::size_t> record_rows(std::span<const ComplexityRecord> records, const EmbeddingTable& table) {
  std::vector<std::size_t> rows;
  rows.reserve(records.size());
  for (const ComplexityRecord& r : records) {
    auto i = table.find(r.concept_id);
    if (!i) throw ValidationError(fmt::format("concept '{}' has no embedding", r.concept_id));
    rows.push_back(*i);
  }
  return rows;
}

Var complexity_loss(Tape& tape, std::span<const ComplexityRecord> records, Var rows,
                    std::span<const std::size_t> table_rows, Var head_weight, Var head_bias, Reduction reduction) {
  if (table_rows.size() != records.size()) throw ShapeError("complexity_loss: one table row per record required");
  if (records.empty()) return tape.constant(Tensor::scalar(0.0));
  std::vector<Var> selected;
  selected.reserve(records.size());
  for (std::size_t r : table_rows) selected.push_back(select_row(rows, r));
  Tensor targets = Tensor::zeros(records.size(), 1);
  for (std::size_t i = 0; i < records.size(); ++i) targets[i] = records[i].d;
  // predictions: n x 1 = E (n x d) * w (d x 1) + b
  Var predictions = add_row(matmul(concat_rows(selected), head_weight), head_bias);
  Var loss = sum(square(sub(tape.constant(std::move(targets)), predictions)));
  if (reduction == Reduction::Mean) loss = scale(loss, 1.0 / static_cast<double>(records.size()));
  return loss;
}

Var combined_loss(Var graph_loss, Var complexity, double tradeoff) {
  if (!(tradeoff >= 0.0 && tradeoff <= 1.0)) throw ValidationError(fmt::format("tradeoff {} is outside [0, 1]", tradeoff));
  return add(scale(graph_loss, tradeoff), scale(complexity, 1.0 - tradeoff));
}

double combined_loss(double graph_loss, double complexity, double tradeoff) {
  if (!(tradeoff >= 0.0 && tradeoff <= 1.0)) throw ValidationError(fmt::format("tradeoff {} is outside [0, 1]", tradeoff));
  return tradeoff * graph_loss + (1.0 - tradeoff) * complexity;
}

}  // namespace moocrep
