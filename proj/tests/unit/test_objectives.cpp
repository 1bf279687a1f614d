#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "moocrep/error.hpp"
#include "moocrep/objectives.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

namespace moocrep {
namespace {

using testing::CourseSpec;
using testing::make_corpus;

TEST(Cosine, Examples) {
  const std::vector<double> v{0.3, -2.0, 1.5};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 1}, std::vector<double>{1, 0}), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}), NumericError);
}

TEST(TripletTerm, HingeArithmetic) {
  EXPECT_EQ(triplet_term(0.9, 0.2, 0.5), 0.0);
  EXPECT_EQ(triplet_term(0.4, 0.4, 0.5), 0.5);
  EXPECT_NEAR(triplet_term(0.1, 0.3, 0.5), 0.7, 1e-15);
}

// Vertices 0..n-1 looked up from one parameter row each.
struct Rows {
  explicit Rows(Tensor values) : table("rows", std::move(values)) {}
  Parameter table;
  VertexLookup bind(Tape& tape) {
    Var all = tape.parameter(table);
    return [all](std::size_t v) { return select_row(all, v); };
  }
};

TEST(TripletLoss, MatchesHandFixture) {
  // f(0,1) = 1/sqrt(2), f(0,2) = 0, f(0,3) = 1
  Rows rows(Tensor::from_rows({{1, 0}, {1, 1}, {0, 1}, {2, 0}}));
  Tape tape;
  const VertexLookup lookup = rows.bind(tape);
  const std::vector<TripletSample> samples{{{0, 1}, {2, 3}}, {{0, 3}, {2}}, {{0, 2}, {}}};
  const double expected = (0.0 - 1.0 / std::sqrt(2.0) + 0.5 > 0 ? 0.0 - 1.0 / std::sqrt(2.0) + 0.5 : 0.0) +
                          (1.0 - 1.0 / std::sqrt(2.0) + 0.5) + 0.0;
  EXPECT_NEAR(triplet_loss(tape, samples, lookup, 0.5).item(), expected, 1e-12);
}

TEST(TripletLoss, EmptyNegativesContributeNothing) {
  Rows rows(Tensor::from_rows({{1, 0}, {0, 1}}));
  Tape tape;
  const std::vector<TripletSample> samples{{{0, 1}, {}}};
  EXPECT_EQ(triplet_loss(tape, samples, rows.bind(tape), 0.5).item(), 0.0);
  EXPECT_EQ(triplet_loss(tape, {}, rows.bind(tape), 0.5).item(), 0.0);
}

TEST(TripletLoss, NonNegativeZeroExactlyWhenMarginsHoldAndScaleInvariant) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, 5);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor values = Tensor::zeros(6, 3);
    for (double& v : values.data()) v = dist(rng);
    std::vector<TripletSample> samples;
    for (int s = 0; s < 4; ++s) samples.push_back({{pick(rng), pick(rng)}, {pick(rng), pick(rng)}});
    for (auto& s : samples)
      if (s.positive.src == s.positive.dst) s.positive.dst = (s.positive.dst + 1) % 6;
    Rows rows(values);
    Tape tape;
    const double loss = triplet_loss(tape, samples, rows.bind(tape), 0.5).item();
    EXPECT_GE(loss, 0.0);
    bool all_hold = true;
    double brute = 0.0;
    for (const auto& s : samples) {
      const double pos = cosine(values.row(s.positive.src), values.row(s.positive.dst));
      for (std::size_t c : s.corrupt_dsts) {
        const double neg = cosine(values.row(s.positive.src), values.row(c));
        all_hold = all_hold && pos - neg >= 0.5;
        brute += std::max(neg - pos + 0.5, 0.0);
      }
    }
    EXPECT_NEAR(loss, brute, 1e-12);
    EXPECT_EQ(loss == 0.0, all_hold);

    Tensor scaled = values;
    for (double& v : scaled.data()) v *= 3.7;
    Rows big(scaled);
    Tape tape2;
    EXPECT_NEAR(triplet_loss(tape2, samples, big.bind(tape2), 0.5).item(), loss, 1e-12);
  }
}

TEST(ComputeComplexity, FiveLectureFixture) {
  const Corpus corpus = load_corpus(testing::fixture("five_lecture"));
  const auto records = compute_complexity(occurrence_index(corpus), corpus);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].concept_id, "c1");
  EXPECT_DOUBLE_EQ(records[0].alc, 0.4);
  EXPECT_DOUBLE_EQ(records[0].ast, 0.6);
  EXPECT_DOUBLE_EQ(records[0].d, 0.5);
}

TEST(ComputeComplexity, SingleLectureAndFullCoverage) {
  const Corpus corpus = make_corpus({"once", "all", "never"}, {CourseSpec{"z", {2, 2}, {{"all"}, {"all", "once"}, {"all"}, {"all"}}},
                                                              CourseSpec{"y", {1}, {{"all"}}}});
  const auto records = compute_complexity(occurrence_index(corpus), corpus);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].concept_id, "once");
  EXPECT_EQ(records[0].alc, 0.25);
  EXPECT_EQ(records[0].ast, 0.25);
  EXPECT_EQ(records[1].concept_id, "all");
  EXPECT_EQ(records[1].alc, 1.0);
  EXPECT_EQ(records[1].ast, 1.0);
  EXPECT_EQ(records[1].d, 1.0);
}

TEST(ComputeComplexity, MatchesBruteForceOracleExactly) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Corpus corpus = testing::random_corpus(rng, 10, 8);
    const auto records = compute_complexity(occurrence_index(corpus), corpus);
    const auto expected = oracle::complexity(corpus);
    ASSERT_EQ(records.size(), expected.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      EXPECT_EQ(records[i].concept_id, expected[i].concept_id);
      EXPECT_EQ(records[i].alc, expected[i].alc);
      EXPECT_EQ(records[i].ast, expected[i].ast);
      EXPECT_EQ(records[i].d, expected[i].d);
      EXPECT_LE(records[i].alc, records[i].ast);
    }
  }
}

TEST(ComputeComplexity, WritesShortestDecimals) {
  const Corpus corpus = load_corpus(testing::fixture("five_lecture"));
  testing::TempDir dir;
  write_complexity(compute_complexity(occurrence_index(corpus), corpus), dir / "complexity.tsv");
  EXPECT_EQ(testing::slurp(dir / "complexity.tsv"), "c1\t0.4\t0.6\t0.5\nc2\t0.6\t0.6\t0.6\n");
}

struct HeadFixture {
  Parameter rows{"rows", Tensor::from_rows({{1.0, 2.0}, {0.5, -1.0}})};
  Parameter weight{"w", Tensor::zeros(2, 1)};
  Parameter bias{"b", Tensor::zeros(1, 1)};

  double loss(std::span<const ComplexityRecord> records, std::span<const std::size_t> table_rows,
              Reduction reduction = Reduction::Sum) {
    Tape tape;
    return complexity_loss(tape, records, tape.parameter(rows), table_rows, tape.parameter(weight),
                           tape.parameter(bias), reduction)
        .item();
  }
};

TEST(ComplexityLoss, Examples) {
  HeadFixture f;
  const std::vector<ComplexityRecord> zeros{{"a", 0, 0, 0, 0.0}, {"b", 1, 0, 0, 0.0}};
  const std::vector<std::size_t> both{0, 1};
  EXPECT_EQ(f.loss(zeros, both), 0.0);

  // w . e0 + b = 0.1 * 1 + 0.1 * 2 + 0 = 0.3
  f.weight.value = Tensor::from_rows({{0.1}, {0.1}});
  const std::vector<ComplexityRecord> one{{"a", 0, 0, 0, 0.5}};
  const std::vector<std::size_t> first{0};
  EXPECT_NEAR(f.loss(one, first), 0.04, 1e-12);
  EXPECT_EQ(f.loss({}, {}), 0.0);
}

TEST(ComplexityLoss, MeanReductionAndScaleSensitivity) {
  HeadFixture f;
  f.weight.value = Tensor::from_rows({{0.2}, {0.1}});
  const std::vector<ComplexityRecord> recs{{"a", 0, 0, 0, 1.0}, {"b", 1, 0, 0, 0.0}};
  const std::vector<std::size_t> both{0, 1};
  const double total = f.loss(recs, both);
  EXPECT_NEAR(f.loss(recs, both, Reduction::Mean), total / 2.0, 1e-15);
  for (double& v : f.rows.value.data()) v *= 2.0;
  EXPECT_GT(std::abs(f.loss(recs, both) - total), 1e-3);
}

TEST(RecordRows, MissingEmbeddingIsNamed) {
  EmbeddingTable table({"a"}, Tensor::zeros(1, 2));
  const std::vector<ComplexityRecord> recs{{"zz", 0, 0, 0, 0.5}};
  try {
    record_rows(recs, table);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'zz'"), std::string::npos);
  }
}

TEST(CombinedLoss, Examples) {
  EXPECT_EQ(combined_loss(2.0, 4.0, 1.0), 2.0);
  EXPECT_EQ(combined_loss(2.0, 4.0, 0.0), 4.0);
  EXPECT_NEAR(combined_loss(2.0, 4.0, 0.5), 3.0, 1e-12);
  EXPECT_THROW(combined_loss(2.0, 4.0, 1.5), ValidationError);
  EXPECT_THROW(combined_loss(2.0, 4.0, -0.1), ValidationError);
  Tape tape;
  const Var v = combined_loss(tape.constant(Tensor::scalar(2.0)), tape.constant(Tensor::scalar(4.0)), 0.5);
  EXPECT_NEAR(v.item(), 3.0, 1e-12);
}

TEST(CombinedLoss, TableAndHeadGradientsCheck) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Tensor values = Tensor::zeros(5, 4);
    for (double& v : values.data()) v = dist(rng);
    Rows rows(values);
    ComplexityHead head(4, rng);
    const std::vector<TripletSample> samples{{{0, 1}, {2, 3}}, {{1, 4}, {0}}, {{3, 2}, {4, 1}}};
    const std::vector<ComplexityRecord> recs{{"a", 0, 0, 0, 0.3}, {"b", 2, 0, 0, 0.8}};
    const std::vector<std::size_t> table_rows{0, 2};
    std::vector<Parameter*> params{&rows.table, &head.weight, &head.bias};
    const GradCheckReport r = grad_check(
        [&](Tape& t) {
          Var all = t.parameter(rows.table);
          const VertexLookup lookup = [all](std::size_t v) { return select_row(all, v); };
          return combined_loss(triplet_loss(t, samples, lookup, 0.5),
                               complexity_loss(t, recs, all, table_rows, t.parameter(head.weight),
                                               t.parameter(head.bias)),
                               0.5);
        },
        params, 1e-6);
    EXPECT_LT(r.max_relative_error, 1e-5) << "seed " << seed << " worst " << r.worst_parameter << "["
                                          << r.worst_index << "] analytic " << r.analytic << " numeric " << r.numeric;
  }
}

}  // namespace
}  // namespace moocrep
