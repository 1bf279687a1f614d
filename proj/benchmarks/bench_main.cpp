#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "moocrep/encoder.hpp"
#include "moocrep/eval.hpp"
#include "moocrep/graph.hpp"
#include "moocrep/metrics.hpp"
#include "moocrep/synthetic.hpp"

namespace {

using namespace moocrep;

struct EncoderBench {
  explicit EncoderBench(std::size_t lectures) : rng(0), encoder(config(), rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    text = Tensor::zeros(lectures, 64);
    for (double& v : text.data()) v = dist(rng);
    for (std::size_t i = 0; i < lectures; ++i) layout.push_back({i, i * 4 / lectures});
  }
  static EncoderConfig config() {
    EncoderConfig c;
    c.input_dim = 64;
    c.hidden = 32;
    c.layers = 2;
    c.heads = 4;
    c.max_lectures = 512;
    c.max_modules = 8;
    return c;
  }
  std::mt19937_64 rng;
  CourseEncoder encoder;
  Tensor text;
  std::vector<LectureSlot> layout;
};

void BM_EncodeCourseForward(benchmark::State& state) {
  EncoderBench b(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Tape tape;
    const EncoderVars vars = b.encoder.bind(tape);
    Var z = b.encoder.encode_course(vars, tape.constant(b.text), b.layout);
    benchmark::DoNotOptimize(z.value().data().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EncodeCourseForward)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_EncodeCourseBackward(benchmark::State& state) {
  EncoderBench b(static_cast<std::size_t>(state.range(0)));
  const auto params = b.encoder.parameters();
  for (auto _ : state) {
    for (Parameter* p : params) p->zero_grad();
    Tape tape;
    const EncoderVars vars = b.encoder.bind(tape);
    Var z = b.encoder.encode_course(vars, tape.constant(b.text), b.layout);
    tape.backward(sum(z));
    benchmark::DoNotOptimize(params.front()->grad.data().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EncodeCourseBackward)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_RankingMetrics(benchmark::State& state) {
  const std::size_t candidates = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<double>> scores(256, std::vector<double>(candidates));
  for (auto& row : scores)
    for (double& s : row) s = dist(rng);
  for (auto _ : state) {
    std::vector<std::size_t> ranks;
    ranks.reserve(scores.size());
    for (std::size_t e = 0; e < scores.size(); ++e) ranks.push_back(rank_of(scores[e], e % candidates));
    benchmark::DoNotOptimize(hr_at_k(ranks, 10) + ndcg_at_k(ranks, 10) + mrr(ranks));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * scores.size()));
}
BENCHMARK(BM_RankingMetrics)->Arg(100)->Arg(1000)->Arg(10000);

void BM_SampleNegatives(benchmark::State& state) {
  SyntheticConfig sc;
  sc.num_users = 0;
  const SyntheticData data = generate_synthetic(sc, 0);
  const RelationGraph graph = induce_implicit(build_explicit(data.corpus), 2);
  std::vector<OrientedEdge> edges;
  for (const Edge& e : graph.edges()) edges.push_back({e.src, e.dst});
  std::mt19937_64 rng(2);
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_negatives(graph, edges[i++ % edges.size()], k, rng));
  }
  state.SetLabel(std::to_string(edges.size()) + " edges");
}
BENCHMARK(BM_SampleNegatives)->Arg(1)->Arg(5)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
