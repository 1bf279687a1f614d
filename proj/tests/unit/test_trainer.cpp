#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "moocrep/error.hpp"
#include "moocrep/trainer.hpp"
#include "oracles/toy.hpp"
#include "support.hpp"

namespace moocrep {
namespace {

TrainConfig toy_config(std::uint64_t seed = 3) {
  TrainConfig cfg;
  cfg.d = 8;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.max_lectures = 8;
  cfg.max_modules = 4;
  cfg.negatives = 3;
  cfg.lr = 1e-2;
  cfg.epochs = 6;
  cfg.batch_size = 16;
  cfg.seed = seed;
  return cfg;
}

class ToyTraining : public ::testing::Test {
 protected:
  Corpus corpus = toy::corpus();
  RelationGraph graph = induce_implicit(build_explicit(corpus), 2);
  TextEncoder textenc = TextEncoder::fallback(16);
};

void expect_bit_equal(const EmbeddingSet& a, const EmbeddingSet& b) {
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.dim(), b.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.ids()[i], b.ids()[i]);
    for (std::size_t k = 0; k < a.dim(); ++k) EXPECT_EQ(a.row(i)[k], b.row(i)[k]) << a.ids()[i] << "[" << k << "]";
  }
}

TEST(TrainConfig, ValidationAndConfigRoundTrip) {
  TrainConfig cfg;
  cfg.lambda1 = 1.2;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.heads = 3;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.precision = 32;
  EXPECT_THROW(cfg.validate(), ValidationError);

  cfg = toy_config(42);
  cfg.mse_reduction = Reduction::Mean;
  cfg.margin = 0.25;
  Config flat;
  cfg.write_to(flat);
  const TrainConfig back = TrainConfig::from_config(Config::parse(flat.to_text()));
  EXPECT_EQ(back.d, cfg.d);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.margin, 0.25);
  EXPECT_EQ(back.lr, cfg.lr);
  EXPECT_EQ(back.mse_reduction, Reduction::Mean);
}

TEST_F(ToyTraining, ZeroEpochsKeepsInitialization) {
  TrainConfig cfg = toy_config();
  cfg.epochs = 0;
  Trainer fresh(cfg, corpus, graph, textenc);
  const EmbeddingSet before = fresh.embeddings();
  Trainer trained(cfg, corpus, graph, textenc);
  trained.train();
  EXPECT_TRUE(trained.history().empty());
  expect_bit_equal(trained.embeddings(), before);
}

TEST_F(ToyTraining, TableStartsFromProjectedText) {
  Trainer trainer(toy_config(), corpus, graph, textenc);
  CourseEncoder& enc = trainer.model().encoder();
  const Concept& c = corpus.concepts()[2];
  const TextVector tv = textenc.encode(c.id, c.text());
  const auto row = trainer.model().table().rows().value.row(trainer.model().table().index(c.id));
  for (std::size_t k = 0; k < 8; ++k) {
    double expected = enc.projection_bias().value(0, k);
    for (std::size_t i = 0; i < tv.values.size(); ++i) expected += tv.values[i] * enc.projection_weight().value(i, k);
    EXPECT_NEAR(row[k], expected, 1e-12);
  }
}

TEST_F(ToyTraining, SameSeedIsBitIdentical) {
  Trainer a(toy_config(), corpus, graph, textenc);
  Trainer b(toy_config(), corpus, graph, textenc);
  a.train();
  b.train();
  ASSERT_EQ(a.history().size(), b.history().size());
  for (std::size_t e = 0; e < a.history().size(); ++e) {
    EXPECT_EQ(a.history()[e].triplet, b.history()[e].triplet);
    EXPECT_EQ(a.history()[e].mse, b.history()[e].mse);
    EXPECT_EQ(a.history()[e].total, b.history()[e].total);
  }
  expect_bit_equal(a.embeddings(), b.embeddings());
}

TEST_F(ToyTraining, DifferentSeedsDiffer) {
  Trainer a(toy_config(1), corpus, graph, textenc);
  Trainer b(toy_config(2), corpus, graph, textenc);
  a.train();
  b.train();
  EXPECT_NE(a.history().back().total, b.history().back().total);
}

TEST_F(ToyTraining, HistoryCombinesLosses) {
  Trainer trainer(toy_config(), corpus, graph, textenc);
  trainer.train();
  for (const EpochLoss& e : trainer.history()) {
    EXPECT_NEAR(e.total, 0.5 * e.triplet + 0.5 * e.mse, 1e-12);
    EXPECT_GE(e.triplet, 0.0);
    EXPECT_GE(e.mse, 0.0);
  }
}

TEST_F(ToyTraining, LossTrendsDownAndNoTensorIsDead) {
  TrainConfig cfg = toy_config();
  cfg.epochs = 40;
  cfg.lr = 1e-3;
  Trainer trainer(cfg, corpus, graph, textenc);
  std::map<std::string, Tensor> touched;
  trainer.on_gradients = [&](std::span<Parameter* const> params) {
    for (const Parameter* p : params) {
      auto [it, inserted] = touched.try_emplace(p->name, Tensor(p->grad.shape()));
      for (std::size_t i = 0; i < p->grad.size(); ++i) it->second.data()[i] += std::abs(p->grad.data()[i]);
    }
  };
  trainer.train();

  const auto& h = trainer.history();
  double first = 0.0, last = 0.0;
  for (std::size_t e = 0; e < 10; ++e) {
    first += h[e].total / 10.0;
    last += h[h.size() - 1 - e].total / 10.0;
  }
  EXPECT_LT(last, first);

  std::size_t longest = 0, most_modules = 0;
  for (std::size_t c = 0; c < corpus.courses().size(); ++c) {
    longest = std::max(longest, corpus.course_layout(c).size());
    most_modules = std::max(most_modules, corpus.courses()[c].modules.size());
  }
  for (const auto& [name, total] : touched) {
    if (name == "encoder.lecture_pos" || name == "encoder.module_pos") {
      const std::size_t used = name == "encoder.lecture_pos" ? longest : most_modules;
      for (std::size_t r = 0; r < total.rows(); ++r) {
        double row_sum = 0.0;
        for (double v : total.row(r)) row_sum += v;
        if (r < used) {
          EXPECT_GT(row_sum, 0.0) << name << " row " << r;
        } else {
          EXPECT_EQ(row_sum, 0.0) << name << " row " << r;
        }
      }
      continue;
    }
    double sum = 0.0;
    for (double v : total.data()) sum += v;
    EXPECT_GT(sum, 0.0) << name;
  }
  EXPECT_EQ(touched.size(), trainer.parameters().size());
}

TEST_F(ToyTraining, CheckpointResumeRetracesUninterruptedRun) {
  testing::TempDir dir;
  TrainConfig cfg = toy_config();
  cfg.epochs = 3;
  Trainer first(cfg, corpus, graph, textenc);
  first.train();
  first.save_checkpoint(dir / "ckpt.bin");

  cfg.epochs = 6;
  Trainer resumed(cfg, corpus, graph, textenc);
  resumed.load_checkpoint(dir / "ckpt.bin");
  EXPECT_EQ(resumed.epoch(), 3u);
  resumed.train();

  Trainer straight(cfg, corpus, graph, textenc);
  straight.train();
  ASSERT_EQ(resumed.history().size(), straight.history().size());
  for (std::size_t e = 0; e < straight.history().size(); ++e) EXPECT_EQ(resumed.history()[e].total, straight.history()[e].total);
  expect_bit_equal(resumed.embeddings(), straight.embeddings());
}

TEST_F(ToyTraining, CheckpointSaveLoadIsIdempotent) {
  testing::TempDir dir;
  Trainer trainer(toy_config(), corpus, graph, textenc);
  trainer.train();
  trainer.save_checkpoint(dir / "a.bin");
  Trainer reloaded(toy_config(), corpus, graph, textenc);
  reloaded.load_checkpoint(dir / "a.bin");
  reloaded.save_checkpoint(dir / "b.bin");
  EXPECT_EQ(testing::slurp(dir / "a.bin"), testing::slurp(dir / "b.bin"));
  expect_bit_equal(reloaded.embeddings(), trainer.embeddings());
}

TEST_F(ToyTraining, CheckpointRejectsDifferentDimension) {
  testing::TempDir dir;
  Trainer trainer(toy_config(), corpus, graph, textenc);
  trainer.save_checkpoint(dir / "ckpt.bin");
  TrainConfig other = toy_config();
  other.d = 16;
  Trainer mismatched(other, corpus, graph, textenc);
  EXPECT_THROW(mismatched.load_checkpoint(dir / "ckpt.bin"), ConfigMismatchError);
}

TEST_F(ToyTraining, RunawayLearningRateIsANumericFailure) {
  TrainConfig cfg = toy_config();
  cfg.lr = 1e308;
  Trainer trainer(cfg, corpus, graph, textenc);
  EXPECT_THROW(trainer.train(), NumericError);
}

TEST(Trainer, StarvedGraphIsRejected) {
  // every lecture is tagged with every concept, so no corruption exists
  const Corpus corpus = testing::make_corpus({"a", "b"}, {testing::CourseSpec{"z", {2}, {{"a", "b"}, {"a", "b"}}}});
  const RelationGraph graph = build_explicit(corpus);
  TrainConfig cfg = toy_config();
  EXPECT_THROW(Trainer(cfg, corpus, graph, TextEncoder::fallback(16)), ValidationError);
}

TEST(Embeddings, RoundTripIsBitExact) {
  EmbeddingSet set(3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (const char* id : {"c1", "l1", "z1", "z2"}) {
    const std::vector<double> v{dist(rng), dist(rng) * 1e-300, dist(rng) * 1e12};
    set.add(id, v);
  }
  testing::TempDir dir;
  write_embeddings(set, dir / "e.txt");
  expect_bit_equal(read_embeddings(dir / "e.txt"), set);
}

TEST(Embeddings, ExportFormat) {
  EmbeddingSet set(4);
  set.add("a", std::vector<double>{1, 0.5, -2, 0.1});
  set.add("b", std::vector<double>{0, 0, 0, 0});
  set.add("c", std::vector<double>{3, 3, 3, 3});
  testing::TempDir dir;
  write_embeddings(set, dir / "e.txt");
  EXPECT_EQ(testing::slurp(dir / "e.txt"), "dim=4\na\t1 0.5 -2 0.1\nb\t0 0 0 0\nc\t3 3 3 3\n");
}

TEST(Embeddings, ShortRowIsNamed) {
  testing::TempDir dir;
  testing::spit(dir / "e.txt", "dim=4\nok\t1 2 3 4\nshort_one\t1 2 3\n");
  try {
    read_embeddings(dir / "e.txt");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("short_one"), std::string::npos) << e.what();
  }
  EmbeddingSet set(2);
  set.add("x", std::vector<double>{1, 2});
  EXPECT_THROW(set.add("x", std::vector<double>{1, 2}), ValidationError);
}

TEST(RandomEmbeddings, CoverEveryEntityAndAreSeeded) {
  const Corpus corpus = toy::corpus();
  const EmbeddingSet a = random_embeddings(corpus, 8, 1);
  EXPECT_EQ(a.size(), 20u);
  expect_bit_equal(a, random_embeddings(corpus, 8, 1));
  EXPECT_NE(a.row(0)[0], random_embeddings(corpus, 8, 2).row(0)[0]);
}

}  // namespace
}  // namespace moocrep
