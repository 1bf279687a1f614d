#include "stages.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "moocrep/corpus.hpp"
#include "moocrep/embeddings.hpp"
#include "moocrep/error.hpp"
#include "moocrep/eval.hpp"
#include "moocrep/graph.hpp"
#include "moocrep/objectives.hpp"
#include "moocrep/synthetic.hpp"
#include "moocrep/textenc.hpp"
#include "moocrep/trainer.hpp"

namespace moocrep::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kToolVersion = "0.1.0";

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys{
      // synthetic corpus
      "num_concepts", "chain_length", "num_courses", "lectures_per_course", "modules_per_course", "num_users",
      "min_segment", "user_noise", "max_concepts_per_lecture",
      // training
      "d", "layers", "heads", "max_lectures", "max_modules", "margin", "lambda1", "negatives", "implicit_threshold",
      "lr", "epochs", "batch_size", "seed", "mse_reduction", "precision", "checkpoint_every",
      // text vectors
      "text_dim", "text_vectors",
      // evaluation
      "embeddings", "split_train", "split_valid", "split_test", "clf_hidden", "clf_epochs", "clf_lr", "rec_window",
      "rec_k",
      // gradient check
      "grad_h", "grad_tolerance", "grad_seeds"};
  return keys;
}

// Config file (if any) with --seed applied; keys under "manifest." are
// bookkeeping from an earlier run and are dropped.
Config resolve_config(const StageArgs& args) {
  Config raw = args.config_path ? Config::load(*args.config_path) : Config{};
  Config cfg;
  for (const auto& [key, value] : raw.values()) {
    if (key.starts_with("manifest.")) continue;
    if (!known_keys().contains(key)) throw ValidationError(fmt::format("unknown config key '{}'", key));
    cfg.set(key, value);
  }
  if (args.seed) cfg.set("seed", std::to_string(*args.seed));
  return cfg;
}

std::uint64_t seed_of(const Config& cfg) { return cfg.get_uint("seed", 0); }

fs::path corpus_dir(const fs::path& out) { return out / "corpus"; }

void require_input(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw ValidationError(fmt::format("missing stage input '{}' (produced by `moocrep {}`)", path.string(), producer));
  }
}

void write_manifest(const StageArgs& args, const Config& cfg, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs) {
  fs::create_directories(args.out);
  Config m = cfg;
  m.set("manifest.stage", args.stage);
  m.set("manifest.tool_version", std::string(kToolVersion));
  m.set("manifest.seed", std::to_string(seed_of(cfg)));
  m.set("manifest.config_hash", cfg.hash());
  // Paths inside the run directory are recorded relative to it.
  auto shown = [&](const fs::path& p) {
    const fs::path rel = p.lexically_relative(args.out);
    return rel.empty() || *rel.begin() == ".." ? p.string() : rel.string();
  };
  std::string in, out;
  for (const auto& p : inputs) in += (in.empty() ? "" : ",") + shown(p);
  for (const auto& p : outputs) out += (out.empty() ? "" : ",") + shown(p);
  m.set("manifest.inputs", in);
  m.set("manifest.outputs", out);
  const fs::path path = args.out / fmt::format("manifest.{}.txt", args.stage);
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  file << m.to_text();
}

CorpusLimits limits_of(const Config& cfg) {
  CorpusLimits limits;
  limits.max_lectures = cfg.get_uint("max_lectures", limits.max_lectures);
  limits.max_modules = cfg.get_uint("max_modules", limits.max_modules);
  return limits;
}

Corpus load_stage_corpus(const StageArgs& args, const Config& cfg) {
  require_input(corpus_dir(args.out) / "courses.jsonl", "synth or ingest");
  return load_corpus(corpus_dir(args.out), limits_of(cfg));
}

TextEncoder text_encoder_of(const Config& cfg) {
  if (auto path = cfg.get("text_vectors")) return TextEncoder::load_precomputed(*path);
  return TextEncoder::fallback(cfg.get_uint("text_dim", TextEncoder::kDefaultDim));
}

SyntheticConfig synthetic_of(const Config& cfg) {
  SyntheticConfig s;
  s.num_concepts = cfg.get_uint("num_concepts", s.num_concepts);
  s.chain_length = cfg.get_uint("chain_length", s.chain_length);
  s.num_courses = cfg.get_uint("num_courses", s.num_courses);
  s.lectures_per_course = cfg.get_uint("lectures_per_course", s.lectures_per_course);
  s.modules_per_course = cfg.get_uint("modules_per_course", s.modules_per_course);
  s.num_users = cfg.get_uint("num_users", s.num_users);
  s.min_segment = cfg.get_uint("min_segment", s.min_segment);
  s.user_noise = cfg.get_double("user_noise", s.user_noise);
  s.max_concepts_per_lecture = cfg.get_uint("max_concepts_per_lecture", s.max_concepts_per_lecture);
  return s;
}

std::array<double, 3> split_of(const Config& cfg) {
  return {cfg.get_double("split_train", 0.8), cfg.get_double("split_valid", 0.1), cfg.get_double("split_test", 0.1)};
}

void print_stats(const CorpusStats& s) {
  fmt::print("concepts {}  courses {}  lectures {}\n", s.concepts, s.courses, s.lectures);
  fmt::print("lectures/course {:.2f}  concepts/course {:.2f}  concepts/lecture {:.2f}\n", s.lectures_per_course,
             s.concepts_per_course, s.concepts_per_lecture);
  if (s.interactions_per_user) {
    fmt::print("users {}  interactions/user {:.2f}\n", s.users, *s.interactions_per_user);
  } else {
    fmt::print("users 0\n");
  }
}

void write_stats(const CorpusStats& s, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << "metric\tvalue\n";
  out << fmt::format("concepts\t{}\ncourses\t{}\nlectures\t{}\n", s.concepts, s.courses, s.lectures);
  out << fmt::format("lectures_per_course\t{}\nconcepts_per_course\t{}\nconcepts_per_lecture\t{}\n",
                     format_double(s.lectures_per_course), format_double(s.concepts_per_course),
                     format_double(s.concepts_per_lecture));
  out << fmt::format("users\t{}\n", s.users);
  if (s.interactions_per_user) out << fmt::format("interactions_per_user\t{}\n", format_double(*s.interactions_per_user));
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
}

RelationGraph load_stage_graph(const StageArgs& args, const Corpus& corpus) {
  require_input(args.out / "graph.tsv", "build-graph");
  return read_edge_list(corpus, args.out / "graph.tsv");
}

EmbeddingSet stage_embeddings(const StageArgs& args, const Config& cfg, const Corpus& corpus) {
  const std::string source = cfg.get_string("embeddings", "trained");
  if (source == "random") {
    return random_embeddings(corpus, cfg.get_uint("d", TrainConfig{}.d), seed_of(cfg));
  }
  if (source != "trained") throw ValidationError(fmt::format("embeddings must be 'trained' or 'random', got '{}'", source));
  require_input(args.out / "embeddings.txt", "export");
  return read_embeddings(args.out / "embeddings.txt");
}

std::string results_path_name(std::string_view task, const Config& cfg) {
  return fmt::format("results.{}.{}.tsv", task, cfg.get_string("embeddings", "trained"));
}

}  // namespace

int run_ingest(const StageArgs& args) {
  if (!args.in) throw ValidationError("ingest needs --in <dir> with the record files");
  const Config cfg = resolve_config(args);
  const fs::path dst = corpus_dir(args.out);
  write_manifest(args, cfg, {*args.in}, {dst});
  const Corpus corpus = load_corpus(*args.in, limits_of(cfg));
  fs::create_directories(dst);
  save_corpus(corpus, dst);
  if (fs::exists(*args.in / "prereqs.jsonl")) {
    save_prereqs(load_prereqs(*args.in / "prereqs.jsonl", corpus), dst / "prereqs.jsonl");
  }
  const CorpusStats stats = summarize(corpus);
  write_stats(stats, args.out / "stats.tsv");
  print_stats(stats);
  return 0;
}

int run_synth(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const SyntheticConfig sc = synthetic_of(cfg);
  const fs::path dst = corpus_dir(args.out);
  write_manifest(args, cfg, {}, {dst});
  const SyntheticData data = generate_synthetic(sc, seed_of(cfg));
  fs::create_directories(dst);
  save_corpus(data.corpus, dst);
  save_prereqs(data.prereqs, dst / "prereqs.jsonl");
  const CorpusStats stats = summarize(data.corpus);
  write_stats(stats, args.out / "stats.tsv");
  print_stats(stats);
  fmt::print("prerequisite labels {}\n", data.prereqs.size());
  return 0;
}

int run_build_graph(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const std::size_t threshold = cfg.get_uint("implicit_threshold", TrainConfig{}.implicit_threshold);
  write_manifest(args, cfg, {corpus_dir(args.out)}, {args.out / "graph.tsv"});
  const Corpus corpus = load_stage_corpus(args, cfg);
  const RelationGraph graph = induce_implicit(build_explicit(corpus), threshold);
  write_edge_list(graph, args.out / "graph.tsv");
  std::map<EdgeType, std::size_t> counts;
  for (const Edge& e : graph.edges()) ++counts[e.type];
  fmt::print("vertices {}  edges {}\n", graph.vertices().size(), graph.edges().size());
  for (const auto& [type, n] : counts) fmt::print("  {:<18} {}\n", to_string(type), n);
  return 0;
}

int run_complexity(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  write_manifest(args, cfg, {corpus_dir(args.out)}, {args.out / "complexity.tsv"});
  const Corpus corpus = load_stage_corpus(args, cfg);
  const auto records = compute_complexity(occurrence_index(corpus), corpus);
  write_complexity(records, args.out / "complexity.tsv");
  fmt::print("complexity records {} of {} concepts\n", records.size(), corpus.concepts().size());
  return 0;
}

int run_train(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const TrainConfig tc = TrainConfig::from_config(cfg);
  const std::size_t every = cfg.get_uint("checkpoint_every", 0);
  const fs::path ckpt = args.out / "checkpoint.bin";
  write_manifest(args, cfg, {corpus_dir(args.out), args.out / "graph.tsv"}, {ckpt, args.out / "history.tsv"});
  const Corpus corpus = load_stage_corpus(args, cfg);
  const RelationGraph graph = load_stage_graph(args, corpus);
  const TextEncoder textenc = text_encoder_of(cfg);

  Trainer trainer(tc, corpus, graph, textenc);
  if (trainer.starved_edges() > 0) {
    fmt::print(stderr, "warning: {} oriented edges have no eligible negative\n", trainer.starved_edges());
  }
  if (args.resume && fs::exists(ckpt)) {
    trainer.load_checkpoint(ckpt);
    fmt::print("resumed at epoch {}\n", trainer.epoch());
  }
  while (trainer.epoch() < tc.epochs) {
    trainer.run_epoch();
    const EpochLoss& l = trainer.history().back();
    fmt::print("epoch {:>4}/{}  triplet {:.6f}  mse {:.6f}  total {:.6f}\n", trainer.epoch(), tc.epochs, l.triplet,
               l.mse, l.total);
    if (every > 0 && trainer.epoch() % every == 0) trainer.save_checkpoint(ckpt);
  }
  trainer.save_checkpoint(ckpt);

  std::ofstream hist(args.out / "history.tsv", std::ios::trunc);
  hist << "epoch\ttriplet\tmse\ttotal\n";
  for (std::size_t e = 0; e < trainer.history().size(); ++e) {
    const EpochLoss& l = trainer.history()[e];
    hist << fmt::format("{}\t{}\t{}\t{}\n", e + 1, format_double(l.triplet), format_double(l.mse), format_double(l.total));
  }
  return 0;
}

int run_export(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const fs::path ckpt = args.out / "checkpoint.bin";
  write_manifest(args, cfg, {corpus_dir(args.out), args.out / "graph.tsv", ckpt}, {args.out / "embeddings.txt"});
  const Corpus corpus = load_stage_corpus(args, cfg);
  const RelationGraph graph = load_stage_graph(args, corpus);
  require_input(ckpt, "train");
  Trainer trainer(TrainConfig::from_config(cfg), corpus, graph, text_encoder_of(cfg));
  trainer.load_checkpoint(ckpt);
  const EmbeddingSet set = trainer.embeddings();
  write_embeddings(set, args.out / "embeddings.txt");
  fmt::print("exported {} vectors of dim {} (epoch {})\n", set.size(), set.dim(), trainer.epoch());
  return 0;
}

int run_eval_prereq(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const fs::path results = args.out / results_path_name("prereq", cfg);
  write_manifest(args, cfg, {corpus_dir(args.out), args.out / "embeddings.txt"}, {results});
  const Corpus corpus = load_stage_corpus(args, cfg);
  require_input(corpus_dir(args.out) / "prereqs.jsonl", "synth or ingest");
  std::vector<PrereqLabel> labels = load_prereqs(corpus_dir(args.out) / "prereqs.jsonl", corpus);
  if (std::none_of(labels.begin(), labels.end(), [](const PrereqLabel& l) { return !l.label; })) {
    std::vector<std::string> ids;
    for (const Concept& c : corpus.concepts()) ids.push_back(c.id);
    labels = with_negatives(labels, ids, seed_of(cfg));
  }
  const EmbeddingSet emb = stage_embeddings(args, cfg, corpus);
  const auto props = split_of(cfg);
  const Split split = make_split(labels.size(), props, seed_of(cfg));
  PrereqEvalConfig pc;
  pc.hidden = cfg.get_uint("clf_hidden", pc.hidden);
  pc.epochs = cfg.get_uint("clf_epochs", pc.epochs);
  pc.lr = cfg.get_double("clf_lr", pc.lr);
  pc.seed = seed_of(cfg);
  const ClassificationScores s = eval_prereq(emb, labels, split, pc);
  const std::string task = cfg.get_string("embeddings", "trained") == "random" ? "prereq_random" : "prereq";
  const std::vector<ReportRow> rows{{task, "precision", s.precision, seed_of(cfg), cfg.hash()},
                                    {task, "recall", s.recall, seed_of(cfg), cfg.hash()},
                                    {task, "f1", s.f1, seed_of(cfg), cfg.hash()}};
  write_report(rows, results);
  fmt::print("{}: P {:.4f}  R {:.4f}  F1 {:.4f}  ({} test pairs)\n", task, s.precision, s.recall, s.f1, split.test.size());
  return 0;
}

int run_eval_rec(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const fs::path results = args.out / results_path_name("rec", cfg);
  write_manifest(args, cfg, {corpus_dir(args.out), args.out / "embeddings.txt"}, {results});
  const Corpus corpus = load_stage_corpus(args, cfg);
  const std::vector<InteractionLog> logs(corpus.interactions().begin(), corpus.interactions().end());
  if (logs.empty()) throw ValidationError("recommendation evaluation needs interaction logs");
  const EmbeddingSet emb = stage_embeddings(args, cfg, corpus);
  std::vector<std::string> candidates;
  for (const Lecture& l : corpus.lectures()) candidates.push_back(l.id);
  const auto props = split_of(cfg);
  const Split split = make_split(logs.size(), props, seed_of(cfg));
  RecEvalConfig rc;
  rc.window = cfg.get_uint("rec_window", rc.window);
  rc.k = cfg.get_uint("rec_k", rc.k);
  const RecScores s = eval_rec(emb, candidates, logs, split, rc);
  const std::string task = cfg.get_string("embeddings", "trained") == "random" ? "rec_random" : "rec";
  const std::vector<ReportRow> rows{{task, fmt::format("hr@{}", rc.k), s.hr, seed_of(cfg), cfg.hash()},
                                    {task, fmt::format("ndcg@{}", rc.k), s.ndcg, seed_of(cfg), cfg.hash()},
                                    {task, "mrr", s.mrr, seed_of(cfg), cfg.hash()}};
  write_report(rows, results);
  fmt::print("{}: HR@{} {:.4f}  nDCG@{} {:.4f}  MRR {:.4f}  ({} events)\n", task, rc.k, s.hr, rc.k, s.ndcg, s.mrr,
             s.events);
  return 0;
}

int run_grad_check(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  const double h = cfg.get_double("grad_h", 1e-6);
  const double tolerance = cfg.get_double("grad_tolerance", 1e-5);
  const std::size_t seeds = cfg.get_uint("grad_seeds", 1);
  const std::uint64_t first = seed_of(cfg);
  if (!args.out.empty()) write_manifest(args, cfg, {}, {args.out / "gradcheck.tsv"});

  double worst = 0.0;
  std::string rows = "seed\tmax_relative_error\tparameter\tindex\tanalytic\tnumeric\n";
  for (std::uint64_t seed = first; seed < first + seeds; ++seed) {
    const GradCheckReport r = desk_grad_check(seed, h);
    fmt::print("seed {}: max relative error {:.3e} at {}[{}] (analytic {:.6e}, numeric {:.6e}, {} entries)\n", seed,
               r.max_relative_error, r.worst_parameter, r.worst_index, r.analytic, r.numeric, r.checked);
    rows += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", seed, format_double(r.max_relative_error), r.worst_parameter,
                        r.worst_index, format_double(r.analytic), format_double(r.numeric));
    worst = std::max(worst, r.max_relative_error);
  }
  if (!args.out.empty()) std::ofstream(args.out / "gradcheck.tsv", std::ios::trunc) << rows;
  fmt::print("max relative error {:.3e} (tolerance {:.0e})\n", worst, tolerance);
  if (!(worst < tolerance)) {
    fmt::print(stderr, "gradient check failed\n");
    return 2;
  }
  return 0;
}

int run_report(const StageArgs& args) {
  const Config cfg = resolve_config(args);
  std::vector<fs::path> inputs;
  if (fs::exists(args.out)) {
    for (const auto& entry : fs::directory_iterator(args.out)) {
      const std::string name = entry.path().filename().string();
      if (name.starts_with("results.") && name.ends_with(".tsv")) inputs.push_back(entry.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw ValidationError(fmt::format("no results.*.tsv files in '{}'; run eval-prereq or eval-rec first", args.out.string()));
  write_manifest(args, cfg, inputs, {args.out / "report.tsv"});
  std::vector<ReportRow> all;
  for (const auto& p : inputs) {
    auto rows = read_report(p);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  write_report(all, args.out / "report.tsv");
  fmt::print("{:<16} {:<12} {:>10} {:>6}  {}\n", "task", "metric", "value", "seed", "config_hash");
  for (const ReportRow& r : all) {
    fmt::print("{:<16} {:<12} {:>10.4f} {:>6}  {}\n", r.task, r.metric, r.value, r.seed, r.config_hash);
  }
  return 0;
}

}  // namespace moocrep::cli
