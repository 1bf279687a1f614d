#include "moocrep/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "moocrep/checkpoint.hpp"
#include "moocrep/error.hpp"
#include "moocrep/synthetic.hpp"

namespace moocrep {

void TrainConfig::validate() const {
  if (d == 0 || layers == 0 || heads == 0) throw ValidationError("d, layers and heads must be positive");
  if (d % heads != 0) throw ValidationError(fmt::format("d={} is not divisible by heads={}", d, heads));
  if (max_lectures == 0 || max_modules == 0) throw ValidationError("max_lectures and max_modules must be positive");
  LossWeights{margin, lambda1}.validate();
  if (negatives == 0) throw ValidationError("negatives must be positive");
  if (implicit_threshold == 0) throw ValidationError("implicit_threshold must be at least 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (precision != 64) {
    throw ValidationError(fmt::format("precision={} is not available; this build trains in 64-bit", precision));
  }
}

TrainConfig TrainConfig::from_config(const Config& cfg) {
  TrainConfig t;
  t.d = cfg.get_uint("d", t.d);
  t.layers = cfg.get_uint("layers", t.layers);
  t.heads = cfg.get_uint("heads", t.heads);
  t.max_lectures = cfg.get_uint("max_lectures", t.max_lectures);
  t.max_modules = cfg.get_uint("max_modules", t.max_modules);
  t.margin = cfg.get_double("margin", t.margin);
  t.lambda1 = cfg.get_double("lambda1", t.lambda1);
  t.negatives = cfg.get_uint("negatives", t.negatives);
  t.implicit_threshold = cfg.get_uint("implicit_threshold", t.implicit_threshold);
  t.lr = cfg.get_double("lr", t.lr);
  t.epochs = cfg.get_uint("epochs", t.epochs);
  t.batch_size = cfg.get_uint("batch_size", t.batch_size);
  t.seed = cfg.get_uint("seed", t.seed);
  const std::string reduction = cfg.get_string("mse_reduction", "sum");
  if (reduction == "sum") {
    t.mse_reduction = Reduction::Sum;
  } else if (reduction == "mean") {
    t.mse_reduction = Reduction::Mean;
  } else {
    throw ValidationError(fmt::format("mse_reduction must be 'sum' or 'mean', got '{}'", reduction));
  }
  t.precision = cfg.get_uint("precision", t.precision);
  t.validate();
  return t;
}

void TrainConfig::write_to(Config& cfg) const {
  cfg.set("d", std::to_string(d));
  cfg.set("layers", std::to_string(layers));
  cfg.set("heads", std::to_string(heads));
  cfg.set("max_lectures", std::to_string(max_lectures));
  cfg.set("max_modules", std::to_string(max_modules));
  cfg.set("margin", format_double(margin));
  cfg.set("lambda1", format_double(lambda1));
  cfg.set("negatives", std::to_string(negatives));
  cfg.set("implicit_threshold", std::to_string(implicit_threshold));
  cfg.set("lr", format_double(lr));
  cfg.set("epochs", std::to_string(epochs));
  cfg.set("batch_size", std::to_string(batch_size));
  cfg.set("seed", std::to_string(seed));
  cfg.set("mse_reduction", mse_reduction == Reduction::Sum ? "sum" : "mean");
  cfg.set("precision", std::to_string(precision));
}

namespace {

EncoderConfig encoder_config(const TrainConfig& cfg, std::size_t input_dim) {
  EncoderConfig e;
  e.input_dim = input_dim;
  e.hidden = cfg.d;
  e.layers = cfg.layers;
  e.heads = cfg.heads;
  e.max_lectures = cfg.max_lectures;
  e.max_modules = cfg.max_modules;
  return e;
}

EmbeddingTable initial_table(const Corpus& corpus, const TextEncoder& textenc, CourseEncoder& encoder,
                             std::mt19937_64& rng) {
  std::vector<std::string> ids;
  Tensor text = Tensor::zeros(corpus.concepts().size() + corpus.lectures().size(), textenc.dim());
  std::vector<bool> empty;
  auto put = [&](const std::string& id, const std::string& body) {
    const TextVector tv = textenc.encode(id, body);
    std::copy(tv.values.begin(), tv.values.end(), text.row(ids.size()).begin());
    empty.push_back(tv.empty_text);
    ids.push_back(id);
  };
  for (const Concept& c : corpus.concepts()) put(c.id, c.text());
  for (const Lecture& l : corpus.lectures()) put(l.id, l.text());

  Tensor rows;
  {
    Tape tape;
    EncoderVars vars = encoder.bind(tape);
    rows = encoder.project(vars, tape.constant(std::move(text))).value();
  }
  // A zero text vector projects onto the bias alone, which would make every
  // cosine involving that entity degenerate.
  std::normal_distribution<double> noise(0.0, 0.02);
  for (std::size_t i = 0; i < empty.size(); ++i) {
    if (!empty[i]) continue;
    for (double& v : rows.row(i)) v = noise(rng);
  }
  return EmbeddingTable(std::move(ids), std::move(rows));
}

}  // namespace

Model::Model(const TrainConfig& cfg, const Corpus& corpus, const TextEncoder& textenc)
    : rng_(cfg.seed),
      encoder_(encoder_config(cfg, textenc.dim()), rng_),
      table_(initial_table(corpus, textenc, encoder_, rng_)),
      head_(cfg.d, rng_) {}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = encoder_.parameters();
  out.push_back(&table_.rows());
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

Trainer::Trainer(TrainConfig cfg, const Corpus& corpus, const RelationGraph& graph, const TextEncoder& textenc)
    : cfg_((cfg.validate(), cfg)),
      corpus_(corpus),
      graph_(graph),
      model_(cfg_, corpus, textenc),
      adam_(AdamOptions{cfg_.lr}),
      params_(model_.parameters()) {
  records_ = compute_complexity(occurrence_index(corpus), corpus);
  record_rows_ = record_rows(records_, model_.table());

  for (std::size_t c = 0; c < corpus.courses().size(); ++c) {
    course_text_.push_back(lecture_text_matrix(corpus, c, textenc));
  }
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  vertex_row_.assign(graph.vertices().size(), kNone);
  vertex_course_.assign(graph.vertices().size(), kNone);
  for (std::size_t v = 0; v < graph.vertices().size(); ++v) {
    const Vertex& vx = graph.vertices()[v];
    if (vx.type == VertexType::Course) {
      auto c = corpus.course_index(vx.id);
      if (!c) throw ValidationError(fmt::format("graph course '{}' is not in the corpus", vx.id));
      vertex_course_[v] = *c;
    } else {
      vertex_row_[v] = model_.table().index(vx.id);
    }
  }

  for (const Edge& e : graph.edges()) {
    oriented_.push_back(OrientedEdge{e.src, e.dst});
    oriented_.push_back(OrientedEdge{e.dst, e.src});
  }
  for (const OrientedEdge& e : oriented_) {
    if (count_corruptions(graph, e) == 0) ++starved_;
  }
  if (2 * starved_ > oriented_.size()) {
    throw ValidationError(fmt::format(
        "negative sampling is starved on {} of {} oriented edges; the graph is too dense to corrupt", starved_,
        oriented_.size()));
  }
}

std::vector<TripletSample> Trainer::draw_samples(std::span<const OrientedEdge> batch, std::mt19937_64& rng) const {
  std::vector<TripletSample> samples;
  samples.reserve(batch.size());
  for (const OrientedEdge& e : batch) {
    NegativeSampling ns = sample_negatives(graph_, e, cfg_.negatives, rng);
    TripletSample s{e, {}};
    for (const NegativeSample& n : ns.samples) s.corrupt_dsts.push_back(n.dst_corrupt);
    samples.push_back(std::move(s));
  }
  return samples;
}

Trainer::LossParts Trainer::batch_loss(Tape& tape, std::span<const TripletSample> samples) {
  CourseEncoder& encoder = model_.encoder();
  EncoderVars vars = encoder.bind(tape);
  Var rows = tape.parameter(model_.table().rows());
  Var head_w = tape.parameter(model_.head().weight);
  Var head_b = tape.parameter(model_.head().bias);

  std::unordered_map<std::size_t, Var> cache;
  VertexLookup lookup = [&](std::size_t v) -> Var {
    if (auto it = cache.find(v); it != cache.end()) return it->second;
    Var out;
    if (const std::size_t c = vertex_course_[v]; c != static_cast<std::size_t>(-1)) {
      out = encoder.encode_course(vars, tape.constant(course_text_[c]), corpus_.course_layout(c));
    } else {
      out = select_row(rows, vertex_row_[v]);
    }
    cache.emplace(v, out);
    return out;
  };

  LossParts parts;
  parts.triplet = triplet_loss(tape, samples, lookup, cfg_.margin);
  parts.mse = complexity_loss(tape, records_, rows, record_rows_, head_w, head_b, cfg_.mse_reduction);
  parts.total = combined_loss(parts.triplet, parts.mse, cfg_.lambda1);
  return parts;
}

void Trainer::run_batch(std::span<const OrientedEdge> batch, std::mt19937_64& rng, EpochLoss& acc) {
  const std::vector<TripletSample> samples = draw_samples(batch, rng);
  Tape tape;
  const LossParts parts = batch_loss(tape, samples);
  for (Parameter* p : params_) p->zero_grad();
  tape.backward(parts.total);
  if (on_gradients) on_gradients(params_);
  adam_.step(params_);
  acc.triplet += parts.triplet.item();
  acc.mse += parts.mse.item();
}

void Trainer::run_epoch() {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                    static_cast<std::uint32_t>(epoch_), 0x6d726570U};
  std::mt19937_64 rng(seq);
  std::vector<OrientedEdge> order = oriented_;
  std::shuffle(order.begin(), order.end(), rng);

  EpochLoss acc;
  std::size_t batches = 0;
  const std::span<const OrientedEdge> all(order);
  std::size_t start = 0;
  do {
    const std::size_t n = std::min(cfg_.batch_size, all.size() - start);
    try {
      run_batch(all.subspan(start, n), rng, acc);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("epoch {}, batch {}: {}", epoch_, batches, e.what()));
    }
    ++batches;
    start += n;
  } while (start < all.size());

  acc.mse /= static_cast<double>(batches);
  acc.total = combined_loss(acc.triplet, acc.mse, cfg_.lambda1);
  if (!std::isfinite(acc.total)) throw NumericError(fmt::format("epoch {}: non-finite loss", epoch_));
  history_.push_back(acc);
  ++epoch_;
}

void Trainer::train() {
  while (epoch_ < cfg_.epochs) run_epoch();
}

EmbeddingSet Trainer::embeddings() {
  const EmbeddingTable& table = model_.table();
  EmbeddingSet set(cfg_.d);
  for (std::size_t i = 0; i < table.size(); ++i) set.add(table.ids()[i], table.rows().value.row(i));
  for (std::size_t c = 0; c < corpus_.courses().size(); ++c) {
    Tape tape;
    EncoderVars vars = model_.encoder().bind(tape);
    Var z = model_.encoder().encode_course(vars, tape.constant(course_text_[c]), corpus_.course_layout(c));
    set.add(corpus_.courses()[c].id, z.value().data());
  }
  return set;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  Config snapshot;
  cfg_.write_to(snapshot);
  CheckpointData data;
  data.config_text = snapshot.to_text();
  data.epoch = epoch_;
  for (const Parameter* p : params_) data.tensors.emplace_back(p->name, p->value);
  const auto& m = adam_.first_moments();
  const auto& v = adam_.second_moments();
  for (std::size_t i = 0; i < m.size(); ++i) {
    data.tensors.emplace_back("adam.m/" + params_[i]->name, m[i]);
    data.tensors.emplace_back("adam.v/" + params_[i]->name, v[i]);
  }
  data.tensors.emplace_back("adam.step", Tensor::scalar(static_cast<double>(adam_.step_count())));
  Tensor history = Tensor::zeros(history_.size(), 3);
  for (std::size_t e = 0; e < history_.size(); ++e) {
    history(e, 0) = history_[e].triplet;
    history(e, 1) = history_[e].mse;
    history(e, 2) = history_[e].total;
  }
  data.tensors.emplace_back("history", std::move(history));
  write_checkpoint(data, path);
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  const CheckpointData data = read_checkpoint(path);
  const Config saved = Config::parse(data.config_text, path.string());
  Config mine;
  cfg_.write_to(mine);
  std::vector<std::string> diffs;
  for (const auto& [key, value] : mine.values()) {
    if (key == "epochs") continue;
    const auto other = saved.get(key);
    if (!other || *other != value) diffs.push_back(fmt::format("{} (checkpoint {}, requested {})", key, other.value_or("<unset>"), value));
  }
  if (!diffs.empty()) {
    std::string msg = "checkpoint configuration differs:";
    for (const auto& d : diffs) msg += " " + d + ";";
    throw ConfigMismatchError(msg);
  }

  for (Parameter* p : params_) {
    const Tensor& t = data.tensor(p->name);
    if (t.shape() != p->value.shape()) {
      throw ConfigMismatchError(fmt::format("checkpoint tensor '{}' has shape {}, model expects {}", p->name,
                                            shape_string(t.shape()), shape_string(p->value.shape())));
    }
    p->value = t;
  }
  const auto step = static_cast<std::uint64_t>(data.tensor("adam.step").item());
  std::vector<Tensor> m, v;
  if (step > 0) {
    for (const Parameter* p : params_) {
      m.push_back(data.tensor("adam.m/" + p->name));
      v.push_back(data.tensor("adam.v/" + p->name));
    }
  }
  adam_.restore(step, std::move(m), std::move(v));
  const Tensor& history = data.tensor("history");
  history_.clear();
  for (std::size_t e = 0; e < history.shape()[0]; ++e) {
    history_.push_back(EpochLoss{history(e, 0), history(e, 1), history(e, 2)});
  }
  epoch_ = data.epoch;
}

TrainResult train(const TrainConfig& cfg, const Corpus& corpus, const RelationGraph& graph, const TextEncoder& textenc) {
  Trainer trainer(cfg, corpus, graph, textenc);
  trainer.train();
  return TrainResult{trainer.embeddings(), trainer.history()};
}

GradCheckReport check_batch_gradients(Trainer& trainer, std::size_t batch_edges, std::uint64_t seed, double h) {
  std::mt19937_64 rng(seed);
  const RelationGraph& graph = trainer.graph();
  std::vector<OrientedEdge> from_course, other;
  for (const OrientedEdge& e : trainer.oriented_edges()) {
    (graph.vertices()[e.src].type == VertexType::Course ? from_course : other).push_back(e);
  }
  std::shuffle(from_course.begin(), from_course.end(), rng);
  std::shuffle(other.begin(), other.end(), rng);
  std::vector<OrientedEdge> batch(from_course.begin(),
                                  from_course.begin() + static_cast<std::ptrdiff_t>(std::min(from_course.size(), batch_edges / 2)));
  for (std::size_t i = 0; i < other.size() && batch.size() < batch_edges; ++i) batch.push_back(other[i]);
  const std::vector<TripletSample> samples = trainer.draw_samples(batch, rng);
  return grad_check([&](Tape& tape) { return trainer.batch_loss(tape, samples).total; }, trainer.parameters(), h);
}

GradCheckReport desk_grad_check(std::uint64_t seed, double h) {
  SyntheticConfig sc;
  sc.num_concepts = 8;
  sc.chain_length = 4;
  sc.num_courses = 3;
  sc.lectures_per_course = 6;
  sc.modules_per_course = 2;
  sc.num_users = 0;
  sc.min_segment = 3;
  const SyntheticData data = generate_synthetic(sc, seed);
  const RelationGraph graph = induce_implicit(build_explicit(data.corpus), 2);
  const TextEncoder textenc = TextEncoder::fallback(16);
  TrainConfig tc;
  tc.d = 8;
  tc.heads = 2;
  tc.layers = 2;
  tc.max_lectures = 8;
  tc.max_modules = 4;
  tc.negatives = 3;
  tc.seed = seed;
  Trainer trainer(tc, data.corpus, graph, textenc);
  return check_batch_gradients(trainer, 8, seed, h);
}

EmbeddingSet random_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  EmbeddingSet set(dim);
  std::vector<double> row(dim);
  auto put = [&](const std::string& id) {
    for (double& v : row) v = dist(rng);
    set.add(id, row);
  };
  for (const Concept& c : corpus.concepts()) put(c.id);
  for (const Lecture& l : corpus.lectures()) put(l.id);
  for (const Course& c : corpus.courses()) put(c.id);
  return set;
}

}  // namespace moocrep
