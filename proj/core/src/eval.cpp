#include "moocrep/eval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <string_view>
#include <unordered_map>
#include <utility>

#include <fmt/format.h>

#include "moocrep/autodiff.hpp"
#include "moocrep/config.hpp"
#include "moocrep/error.hpp"
#include "moocrep/optim.hpp"

namespace moocrep {

Split make_split(std::size_t n, std::span<const double> proportions, std::uint64_t seed) {
  if (proportions.size() != 3) throw ValidationError("a split needs exactly three proportions");
  double total = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0)) throw ValidationError("split proportions must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError(fmt::format("split proportions sum to {}, not 1", total));
  }

  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * proportions[i];
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(sizes[i]);
    used += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++sizes[order[i % 3]];
  for (std::size_t i = 0; i < 3; ++i) {
    if (proportions[i] > 0.0 && sizes[i] == 0) {
      throw ValidationError(fmt::format("{} items are too few to populate every split part", n));
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(sizes[0]));
  s.valid.assign(idx.begin() + static_cast<std::ptrdiff_t>(sizes[0]),
                 idx.begin() + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(sizes[0] + sizes[1]), idx.end());
  return s;
}

Split make_split(std::size_t n, std::uint64_t seed) {
  constexpr double kDefault[] = {0.8, 0.1, 0.1};
  return make_split(n, kDefault, seed);
}

namespace {

Tensor pair_features(const EmbeddingSet& emb, std::span<const PrereqLabel> labels, std::span<const std::size_t> which) {
  const std::size_t d = emb.dim();
  Tensor x = Tensor::zeros(which.size(), 4 * d);
  for (std::size_t r = 0; r < which.size(); ++r) {
    const PrereqLabel& l = labels[which[r]];
    const auto a = emb.at(l.concept_a);
    const auto b = emb.at(l.concept_b);
    auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = a[j];
      row[d + j] = b[j];
      row[2 * d + j] = a[j] - b[j];
      row[3 * d + j] = a[j] * b[j];
    }
  }
  return x;
}

void init_uniform(Parameter& p, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : p.value.data()) v = dist(rng);
}

}  // namespace

ClassificationScores eval_prereq(const EmbeddingSet& embeddings, std::span<const PrereqLabel> labels,
                                 const Split& split, const PrereqEvalConfig& cfg) {
  if (split.test.empty()) throw ValidationError("prerequisite evaluation: test split is empty");
  for (const PrereqLabel& l : labels) {
    for (const std::string* id : {&l.concept_a, &l.concept_b}) {
      if (!embeddings.contains(*id)) throw ValidationError(fmt::format("concept '{}' has no embedding", *id));
    }
  }
  for (const auto* part : {&split.train, &split.valid, &split.test})
    for (std::size_t i : *part)
      if (i >= labels.size()) throw ValidationError("split index out of range");

  std::vector<double> y;
  std::size_t positives = 0;
  for (std::size_t i : split.train) {
    y.push_back(labels[i].label ? 1.0 : 0.0);
    positives += labels[i].label;
  }
  if (positives == 0 || positives == split.train.size()) {
    throw ValidationError("prerequisite evaluation: train split lacks one of the two classes");
  }

  Tensor x_train = pair_features(embeddings, labels, split.train);
  Tensor x_test = pair_features(embeddings, labels, split.test);
  const std::size_t f = x_train.cols();
  std::vector<double> mean(f), scale(f);
  for (std::size_t j = 0; j < f; ++j) {
    double mu = 0.0;
    for (std::size_t r = 0; r < x_train.rows(); ++r) mu += x_train(r, j);
    mu /= static_cast<double>(x_train.rows());
    double var = 0.0;
    for (std::size_t r = 0; r < x_train.rows(); ++r) var += (x_train(r, j) - mu) * (x_train(r, j) - mu);
    var /= static_cast<double>(x_train.rows());
    const double sd = std::sqrt(var);
    const double inv = sd > 1e-12 ? 1.0 / sd : 0.0;
    mean[j] = mu;
    scale[j] = inv;
  }
  auto standardize = [&](Tensor& x) {
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t j = 0; j < f; ++j) x(r, j) = (x(r, j) - mean[j]) * scale[j];
  };
  standardize(x_train);
  standardize(x_test);

  std::mt19937_64 rng(cfg.seed);
  Parameter w1{"clf.w1", Tensor::zeros(f, cfg.hidden)};
  Parameter b1{"clf.b1", Tensor::zeros(1, cfg.hidden)};
  Parameter w2{"clf.w2", Tensor::zeros(cfg.hidden, 1)};
  Parameter b2{"clf.b2", Tensor::zeros(1, 1)};
  init_uniform(w1, f, rng);
  init_uniform(w2, cfg.hidden, rng);
  std::vector<Parameter*> params{&w1, &b1, &w2, &b2};
  Adam adam(AdamOptions{cfg.lr});

  auto forward = [&](Tape& tape, const Tensor& x) {
    Var h = relu(add_row(matmul(tape.constant(x), tape.parameter(w1)), tape.parameter(b1)));
    return add_row(matmul(h, tape.parameter(w2)), tape.parameter(b2));
  };
  // With a validation part, keep the weights of the epoch with the lowest
  // validation loss.
  Tensor x_valid;
  std::vector<double> y_valid;
  for (std::size_t i : split.valid) y_valid.push_back(labels[i].label ? 1.0 : 0.0);
  if (!split.valid.empty()) {
    x_valid = pair_features(embeddings, labels, split.valid);
    standardize(x_valid);
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_values;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    Var loss = bce_with_logits(forward(tape, x_train), y);
    for (Parameter* p : params) p->zero_grad();
    tape.backward(loss);
    adam.step(params);
    if (y_valid.empty()) continue;
    Tape vt;
    const double vloss = bce_with_logits(forward(vt, x_valid), y_valid).item();
    if (vloss < best) {
      best = vloss;
      best_values.clear();
      for (const Parameter* p : params) best_values.push_back(p->value);
    }
  }
  if (!best_values.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  }

  Tape tape;
  const Tensor logits = forward(tape, x_test).value();
  std::vector<char> predicted, actual;
  for (std::size_t r = 0; r < split.test.size(); ++r) {
    predicted.push_back(logits[r] > 0.0);
    actual.push_back(labels[split.test[r]].label);
  }
  std::unique_ptr<bool[]> p(new bool[predicted.size()]), a(new bool[actual.size()]);
  std::copy(predicted.begin(), predicted.end(), p.get());
  std::copy(actual.begin(), actual.end(), a.get());
  return macro_scores(confusion({p.get(), predicted.size()}, {a.get(), actual.size()}));
}

std::vector<PrereqLabel> with_negatives(std::span<const PrereqLabel> positives,
                                        std::span<const std::string> concept_ids, std::uint64_t seed) {
  std::set<std::pair<std::string, std::string>> taken;
  for (const PrereqLabel& l : positives) taken.emplace(l.concept_a, l.concept_b);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, concept_ids.empty() ? 0 : concept_ids.size() - 1);
  std::vector<PrereqLabel> out(positives.begin(), positives.end());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const PrereqLabel& pos = positives[i];
    std::pair<std::string, std::string> neg{pos.concept_b, pos.concept_a};
    if (i % 2 == 1 || taken.contains(neg)) {
      bool found = false;
      for (int attempt = 0; attempt < 1000 && !found && concept_ids.size() > 1; ++attempt) {
        neg = {concept_ids[pick(rng)], concept_ids[pick(rng)]};
        found = neg.first != neg.second && !taken.contains(neg);
      }
      if (!found) continue;
    }
    taken.insert(neg);
    out.push_back(PrereqLabel{neg.first, neg.second, false});
  }
  return out;
}

std::size_t rank_of(std::span<const double> scores, std::size_t truth) {
  if (truth >= scores.size()) throw ValidationError("true item is not among the candidates");
  const double s = scores[truth];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > s || (scores[i] == s && i < truth)) ++rank;
  }
  return rank;
}

namespace {

double safe_cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double den = std::sqrt(aa) * std::sqrt(bb);
  return den < 1e-12 ? 0.0 : ab / den;
}

}  // namespace

std::vector<std::size_t> recommendation_ranks(const EmbeddingSet& embeddings, std::span<const std::string> candidates,
                                              std::span<const InteractionLog> logs, const Split& split,
                                              const RecEvalConfig& cfg) {
  if (cfg.window == 0) throw ValidationError("context window must be positive");
  if (cfg.k == 0) throw ValidationError("cutoff k must be at least 1");
  if (split.test.empty()) throw ValidationError("recommendation evaluation: test split is empty");
  for (const InteractionLog& log : logs) {
    if (log.lecture_ids.size() < 2) {
      throw ValidationError(fmt::format("log of user '{}' has fewer than 2 interactions", log.user_id));
    }
  }
  std::unordered_map<std::string_view, std::size_t> cand_index;
  for (std::size_t i = 0; i < candidates.size(); ++i) cand_index.emplace(candidates[i], i);
  std::vector<std::span<const double>> cand_rows;
  for (const std::string& id : candidates) cand_rows.push_back(embeddings.at(id));

  const std::size_t d = embeddings.dim();
  std::vector<std::size_t> ranks;
  std::vector<double> scores(candidates.size());
  std::vector<double> ctx(d);
  for (std::size_t u : split.test) {
    if (u >= logs.size()) throw ValidationError("split index out of range");
    const auto& seq = logs[u].lecture_ids;
    for (std::size_t t = 1; t < seq.size(); ++t) {
      std::fill(ctx.begin(), ctx.end(), 0.0);
      const std::size_t from = t > cfg.window ? t - cfg.window : 0;
      for (std::size_t s = from; s < t; ++s) {
        const auto row = embeddings.at(seq[s]);
        for (std::size_t j = 0; j < d; ++j) ctx[j] += row[j];
      }
      for (double& v : ctx) v /= static_cast<double>(t - from);
      const auto truth = cand_index.find(seq[t]);
      if (truth == cand_index.end()) {
        throw ValidationError(fmt::format("lecture '{}' is not a recommendation candidate", seq[t]));
      }
      for (std::size_t i = 0; i < candidates.size(); ++i) scores[i] = safe_cosine(ctx, cand_rows[i]);
      ranks.push_back(rank_of(scores, truth->second));
    }
  }
  return ranks;
}

RecScores eval_rec(const EmbeddingSet& embeddings, std::span<const std::string> candidates,
                   std::span<const InteractionLog> logs, const Split& split, const RecEvalConfig& cfg) {
  const auto ranks = recommendation_ranks(embeddings, candidates, logs, split, cfg);
  return RecScores{hr_at_k(ranks, cfg.k), ndcg_at_k(ranks, cfg.k), mrr(ranks), ranks.size()};
}

void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  out << "task\tmetric\tvalue\tseed\tconfig_hash\n";
  for (const ReportRow& r : rows) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\n", r.task, r.metric, format_double(r.value), r.seed, r.config_hash);
  }
  if (!out) throw ValidationError(fmt::format("write to '{}' failed", path.string()));
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open report '{}'", path.string()));
  std::vector<ReportRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (;;) {
      const auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() != 5) throw ValidationError(fmt::format("{}:{}: expected 5 columns", path.string(), line_no));
    ReportRow r{cols[0], cols[1], 0.0, 0, cols[4]};
    auto [p1, e1] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), r.value);
    auto [p2, e2] = std::from_chars(cols[3].data(), cols[3].data() + cols[3].size(), r.seed);
    if (e1 != std::errc() || e2 != std::errc()) {
      throw ValidationError(fmt::format("{}:{}: malformed value or seed", path.string(), line_no));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace moocrep
