#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "moocrep/config.hpp"
#include "moocrep/corpus.hpp"
#include "moocrep/embeddings.hpp"
#include "moocrep/encoder.hpp"
#include "moocrep/graph.hpp"
#include "moocrep/objectives.hpp"
#include "moocrep/optim.hpp"
#include "moocrep/textenc.hpp"

namespace moocrep {

struct TrainConfig {
  std::size_t d = 128;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t max_lectures = 510;
  std::size_t max_modules = 65;
  double margin = 0.5;
  double lambda1 = 0.5;
  std::size_t negatives = 5;
  std::size_t implicit_threshold = 2;
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  Reduction mse_reduction = Reduction::Sum;
  /// Floating-point width. Only 64 is built; 32 is rejected by validate().
  std::size_t precision = 64;

  void validate() const;

  /// Keys: d, layers, heads, max_lectures, max_modules, margin, lambda1,
  /// negatives, implicit_threshold, lr, epochs, batch_size, seed,
  /// mse_reduction (sum|mean), precision.
  static TrainConfig from_config(const Config& cfg);
  void write_to(Config& cfg) const;
};

struct EpochLoss {
  double triplet = 0.0;  // graph loss summed over the epoch's batches
  double mse = 0.0;      // complexity loss averaged over the epoch's batches
  double total = 0.0;    // lambda1 * triplet + (1 - lambda1) * mse
};

/// Every trainable tensor: course encoder, leaf-entity table, complexity head.
class Model {
 public:
  /// Concept and lecture rows start as the projected text vectors; entities
  /// whose text is empty start from small Gaussian noise instead.
  Model(const TrainConfig& cfg, const Corpus& corpus, const TextEncoder& textenc);

  CourseEncoder& encoder() noexcept { return encoder_; }
  const CourseEncoder& encoder() const noexcept { return encoder_; }
  EmbeddingTable& table() noexcept { return table_; }
  const EmbeddingTable& table() const noexcept { return table_; }
  ComplexityHead& head() noexcept { return head_; }

  std::vector<Parameter*> parameters();

 private:
  std::mt19937_64 rng_;
  CourseEncoder encoder_;
  EmbeddingTable table_;
  ComplexityHead head_;
};

/// Margin-ranking graph loss plus complexity regression, trained jointly with
/// Adam. Every epoch presents each edge once per orientation in a seeded
/// shuffle, with fresh negatives. The RNG of epoch e depends only on
/// (seed, e), so resuming from a checkpoint retraces the uninterrupted run.
class Trainer {
 public:
  /// Throws ValidationError when more than half of the oriented edges have no
  /// eligible corruption.
  Trainer(TrainConfig cfg, const Corpus& corpus, const RelationGraph& graph, const TextEncoder& textenc);

  void run_epoch();
  /// Runs epochs until config().epochs have completed.
  void train();

  const TrainConfig& config() const noexcept { return cfg_; }
  std::size_t epoch() const noexcept { return epoch_; }
  const std::vector<EpochLoss>& history() const noexcept { return history_; }
  Model& model() noexcept { return model_; }
  const RelationGraph& graph() const noexcept { return graph_; }
  const std::vector<ComplexityRecord>& complexity_records() const noexcept { return records_; }
  std::size_t starved_edges() const noexcept { return starved_; }

  /// Concept and lecture table rows, then encoded course vectors.
  EmbeddingSet embeddings();

  /// Called after each backward pass with the parameter list holding fresh gradients.
  std::function<void(std::span<Parameter* const>)> on_gradients;

  struct LossParts {
    Var triplet;
    Var mse;
    Var total;
  };
  /// One positive plus k corruptions per oriented edge.
  std::vector<TripletSample> draw_samples(std::span<const OrientedEdge> batch, std::mt19937_64& rng) const;
  /// Combined objective over the given samples and every complexity record.
  LossParts batch_loss(Tape& tape, std::span<const TripletSample> samples);
  std::span<const OrientedEdge> oriented_edges() const noexcept { return oriented_; }
  std::span<Parameter* const> parameters() const noexcept { return params_; }

  void save_checkpoint(const std::filesystem::path& path) const;
  /// Restores parameters, optimizer state, history and epoch. Throws
  /// ConfigMismatchError if any setting other than `epochs` differs.
  void load_checkpoint(const std::filesystem::path& path);

 private:
  void run_batch(std::span<const OrientedEdge> batch, std::mt19937_64& rng, EpochLoss& acc);

  TrainConfig cfg_;
  const Corpus& corpus_;
  const RelationGraph& graph_;
  Model model_;
  Adam adam_;
  std::vector<Parameter*> params_;
  std::vector<ComplexityRecord> records_;
  std::vector<std::size_t> record_rows_;
  std::vector<OrientedEdge> oriented_;
  std::vector<Tensor> course_text_;       // per course, lecture text rows in layout order
  std::vector<std::size_t> vertex_row_;   // table row of concept/lecture vertices
  std::vector<std::size_t> vertex_course_;  // course index of course vertices
  std::size_t starved_ = 0;
  std::size_t epoch_ = 0;
  std::vector<EpochLoss> history_;
};

struct TrainResult {
  EmbeddingSet embeddings;
  std::vector<EpochLoss> history;
};

TrainResult train(const TrainConfig& cfg, const Corpus& corpus, const RelationGraph& graph, const TextEncoder& textenc);

/// Combined-objective gradient check on one batch of the trainer's oriented
/// edges: up to batch_edges / 2 edges leaving a course vertex (so the encoder
/// is exercised) plus other edges, with seeded negatives.
GradCheckReport check_batch_gradients(Trainer& trainer, std::size_t batch_edges, std::uint64_t seed, double h = 1e-6);

/// Small fixed setting for gradient checks: 8 concepts in chains of 4, three
/// courses of 6 lectures in 2 modules, d = 8, 2 heads, 2 layers, 16-dim
/// fallback text vectors, a batch of 8 edges.
GradCheckReport desk_grad_check(std::uint64_t seed, double h = 1e-6);

/// Gaussian N(0, 1) vectors for every concept, lecture and course; the
/// random-initialization baseline.
EmbeddingSet random_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed);

}  // namespace moocrep
