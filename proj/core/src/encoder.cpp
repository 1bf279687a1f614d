#include "moocrep/encoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

void EncoderConfig::validate() const {
  if (input_dim == 0 || hidden == 0) throw ValidationError("encoder dimensions must be positive");
  if (layers < 1) throw ValidationError("encoder needs at least one transformer layer");
  if (heads == 0 || hidden % heads != 0) {
    throw ValidationError(fmt::format("hidden size {} is not divisible by head count {}", hidden, heads));
  }
  if (max_lectures == 0 || max_modules == 0) throw ValidationError("position table sizes must be positive");
  if (ffn_multiplier == 0) throw ValidationError("ffn_multiplier must be positive");
  if (!(ln_eps >= 0.0)) throw ValidationError("ln_eps must be non-negative");
}

namespace {

Tensor uniform_fan_in(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::zeros(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Tensor gaussian(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t = Tensor::zeros(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

}  // namespace

CourseEncoder::CourseEncoder(EncoderConfig config, std::mt19937_64& rng) : config_(config) {
  config_.validate();
  const std::size_t d = config_.hidden;
  const std::size_t inner = d * config_.ffn_multiplier;
  proj_w_ = Parameter("encoder.proj.weight", uniform_fan_in(config_.input_dim, d, rng));
  proj_b_ = Parameter("encoder.proj.bias", Tensor::zeros(1, d));
  lecture_pos_ = Parameter("encoder.lecture_pos", gaussian(config_.max_lectures, d, 0.02, rng));
  module_pos_ = Parameter("encoder.module_pos", gaussian(config_.max_modules, d, 0.02, rng));
  cls_ = Parameter("encoder.cls", gaussian(1, d, 0.02, rng));
  embed_ln_gain_ = Parameter("encoder.embed_ln.gain", Tensor::filled(1, d, 1.0));
  embed_ln_bias_ = Parameter("encoder.embed_ln.bias", Tensor::zeros(1, d));
  layers_.resize(config_.layers);
  for (std::size_t i = 0; i < config_.layers; ++i) {
    TransformerLayerParams& l = layers_[i];
    const std::string p = fmt::format("encoder.layer{}.", i);
    l.wq = Parameter(p + "wq", uniform_fan_in(d, d, rng));
    l.bq = Parameter(p + "bq", Tensor::zeros(1, d));
    l.wk = Parameter(p + "wk", uniform_fan_in(d, d, rng));
    l.wv = Parameter(p + "wv", uniform_fan_in(d, d, rng));
    l.bv = Parameter(p + "bv", Tensor::zeros(1, d));
    l.wo = Parameter(p + "wo", uniform_fan_in(d, d, rng));
    l.bo = Parameter(p + "bo", Tensor::zeros(1, d));
    l.w1 = Parameter(p + "ffn.w1", uniform_fan_in(d, inner, rng));
    l.b1 = Parameter(p + "ffn.b1", Tensor::zeros(1, inner));
    l.w2 = Parameter(p + "ffn.w2", uniform_fan_in(inner, d, rng));
    l.b2 = Parameter(p + "ffn.b2", Tensor::zeros(1, d));
    l.ln1_gain = Parameter(p + "ln1.gain", Tensor::filled(1, d, 1.0));
    l.ln1_bias = Parameter(p + "ln1.bias", Tensor::zeros(1, d));
    l.ln2_gain = Parameter(p + "ln2.gain", Tensor::filled(1, d, 1.0));
    l.ln2_bias = Parameter(p + "ln2.bias", Tensor::zeros(1, d));
  }
}

std::vector<Parameter*> CourseEncoder::parameters() {
  std::vector<Parameter*> out{&proj_w_, &proj_b_, &lecture_pos_, &module_pos_, &cls_, &embed_ln_gain_, &embed_ln_bias_};
  for (TransformerLayerParams& l : layers_) {
    for (Parameter* p : {&l.wq, &l.bq, &l.wk, &l.wv, &l.bv, &l.wo, &l.bo, &l.w1, &l.b1, &l.w2, &l.b2, &l.ln1_gain,
                         &l.ln1_bias, &l.ln2_gain, &l.ln2_bias})
      out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> CourseEncoder::parameters() const {
  auto mutable_params = const_cast<CourseEncoder*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

EncoderVars CourseEncoder::bind(Tape& tape) {
  EncoderVars v;
  v.encoder = this;
  v.proj_w = tape.parameter(proj_w_);
  v.proj_b = tape.parameter(proj_b_);
  v.lecture_pos = tape.parameter(lecture_pos_);
  v.module_pos = tape.parameter(module_pos_);
  v.cls = tape.parameter(cls_);
  v.embed_ln_gain = tape.parameter(embed_ln_gain_);
  v.embed_ln_bias = tape.parameter(embed_ln_bias_);
  for (TransformerLayerParams& l : layers_) {
    v.layers.push_back(EncoderVars::Layer{
        tape.parameter(l.wq), tape.parameter(l.bq), tape.parameter(l.wk), tape.parameter(l.wv), tape.parameter(l.bv),
        tape.parameter(l.wo), tape.parameter(l.bo), tape.parameter(l.w1), tape.parameter(l.b1), tape.parameter(l.w2),
        tape.parameter(l.b2), tape.parameter(l.ln1_gain), tape.parameter(l.ln1_bias), tape.parameter(l.ln2_gain),
        tape.parameter(l.ln2_bias)});
  }
  return v;
}

Var CourseEncoder::project(const EncoderVars& vars, Var text_rows) const {
  if (text_rows.cols() != config_.input_dim) {
    throw ShapeError(fmt::format("text vectors have {} columns, encoder expects {}", text_rows.cols(), config_.input_dim));
  }
  return add_row(matmul(text_rows, vars.proj_w), vars.proj_b);
}

void CourseEncoder::check_layout(std::size_t rows, std::span<const LectureSlot> layout) const {
  if (rows != layout.size()) throw ShapeError("lecture vector count does not match course layout");
  if (layout.empty()) throw ValidationError("cannot encode a course without lectures");
  if (layout.size() > config_.max_lectures) {
    throw ValidationError(fmt::format("course has {} lectures, encoder maximum is {}", layout.size(), config_.max_lectures));
  }
  for (const LectureSlot& slot : layout) {
    if (slot.module >= config_.max_modules) {
      throw ValidationError(fmt::format("module position {} exceeds encoder maximum {}", slot.module, config_.max_modules));
    }
  }
}

Var CourseEncoder::position_aware_embed(const EncoderVars& vars, Var text_rows, std::span<const LectureSlot> layout) const {
  check_layout(text_rows.rows(), layout);
  Var projected = project(vars, text_rows);
  std::vector<Var> positions;
  positions.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    positions.push_back(add(select_row(vars.lecture_pos, i), select_row(vars.module_pos, layout[i].module)));
  }
  return add(projected, concat_rows(positions));
}

Var CourseEncoder::transformer_layer(const EncoderVars& vars, std::size_t layer, Var x, std::span<const bool> mask) const {
  const EncoderVars::Layer& p = vars.layers.at(layer);
  const std::size_t d = config_.hidden;
  if (x.cols() != d) throw ShapeError(fmt::format("transformer input has {} columns, expected {}", x.cols(), d));
  if (!mask.empty() && mask.size() != x.rows()) throw ShapeError("attention mask length does not match sequence");

  const std::size_t dk = d / config_.heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  Var q = add_row(matmul(x, p.wq), p.bq);
  Var k = matmul(x, p.wk);
  Var v = add_row(matmul(x, p.wv), p.bv);
  std::vector<Var> heads;
  heads.reserve(config_.heads);
  for (std::size_t h = 0; h < config_.heads; ++h) {
    Var qh = slice_cols(q, h * dk, dk);
    Var kh = slice_cols(k, h * dk, dk);
    Var vh = slice_cols(v, h * dk, dk);
    Var weights = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt_dk), mask);
    heads.push_back(matmul(weights, vh));
  }
  Var attended = add_row(matmul(concat_cols(heads), p.wo), p.bo);
  Var h1 = layer_norm_rows(add(x, attended), p.ln1_gain, p.ln1_bias, config_.ln_eps);
  Var ffn = add_row(matmul(relu(add_row(matmul(h1, p.w1), p.b1)), p.w2), p.b2);
  return layer_norm_rows(add(h1, ffn), p.ln2_gain, p.ln2_bias, config_.ln_eps);
}

Var CourseEncoder::encode_sequence(const EncoderVars& vars, Var lectures_hat, std::span<const bool> mask) const {
  if (!mask.empty() && mask.size() != lectures_hat.rows()) throw ShapeError("mask length does not match lecture rows");
  const std::array<Var, 2> parts{lectures_hat, vars.cls};
  Var x = layer_norm_rows(concat_rows(parts), vars.embed_ln_gain, vars.embed_ln_bias, config_.ln_eps);
  // Padding flags plus an unmasked CLS slot; std::vector<bool> is not contiguous.
  std::unique_ptr<bool[]> flags(new bool[x.rows()]());
  std::copy(mask.begin(), mask.end(), flags.get());
  const std::span<const bool> key_mask(flags.get(), x.rows());
  for (std::size_t l = 0; l < config_.layers; ++l) x = transformer_layer(vars, l, x, key_mask);
  return select_row(x, x.rows() - 1);
}

Var CourseEncoder::encode_course(const EncoderVars& vars, Var text_rows, std::span<const LectureSlot> layout) const {
  return encode_sequence(vars, position_aware_embed(vars, text_rows, layout));
}

std::vector<double> CourseEncoder::encode_course(const Corpus& corpus, std::size_t course, const TextEncoder& textenc) {
  Tape tape;
  EncoderVars vars = bind(tape);
  Var text = tape.constant(lecture_text_matrix(corpus, course, textenc));
  Var z = encode_course(vars, text, corpus.course_layout(course));
  const auto data = z.value().data();
  return {data.begin(), data.end()};
}

Tensor lecture_text_matrix(const Corpus& corpus, std::size_t course, const TextEncoder& textenc) {
  const auto layout = corpus.course_layout(course);
  Tensor out = Tensor::zeros(layout.size(), textenc.dim());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const Lecture& lec = corpus.lectures()[layout[i].lecture];
    const TextVector tv = textenc.encode(lec.id, lec.text());
    std::copy(tv.values.begin(), tv.values.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace moocrep
