#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "moocrep/autodiff.hpp"
#include "moocrep/corpus.hpp"
#include "moocrep/textenc.hpp"

namespace moocrep {

struct EncoderConfig {
  std::size_t input_dim = TextEncoder::kDefaultDim;  // text vector length
  std::size_t hidden = 128;                          // d
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t max_lectures = 510;
  std::size_t max_modules = 65;
  std::size_t ffn_multiplier = 4;
  double ln_eps = 1e-5;

  void validate() const;
};

/// Weights of one post-norm transformer layer. Attention heads are column
/// blocks of the d x d projections. There is no key bias: it shifts every
/// logit of a query equally and cancels in the softmax.
struct TransformerLayerParams {
  Parameter wq, bq, wk, wv, bv, wo, bo;
  Parameter w1, b1, w2, b2;
  Parameter ln1_gain, ln1_bias, ln2_gain, ln2_bias;
};

class CourseEncoder;

/// Encoder parameters recorded on one tape. Create once per tape and reuse
/// for every course encoded on it.
struct EncoderVars {
  Var proj_w, proj_b, lecture_pos, module_pos, cls, embed_ln_gain, embed_ln_bias;
  struct Layer {
    Var wq, bq, wk, wv, bv, wo, bo, w1, b1, w2, b2, ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  };
  std::vector<Layer> layers;
  const CourseEncoder* encoder = nullptr;
};

/// Segment-aware course encoder: projected lecture text vectors plus lecture
/// and module position embeddings, followed by stacked transformer layers
/// over [lectures..., CLS]; the course vector is the final CLS output.
class CourseEncoder {
 public:
  /// Weights use symmetric uniform fan-in init, position tables and the CLS
  /// vector N(0, 0.02^2), biases zero, layer-norm gains one.
  CourseEncoder(EncoderConfig config, std::mt19937_64& rng);

  const EncoderConfig& config() const noexcept { return config_; }

  Parameter& projection_weight() noexcept { return proj_w_; }
  Parameter& projection_bias() noexcept { return proj_b_; }
  Parameter& lecture_positions() noexcept { return lecture_pos_; }
  Parameter& module_positions() noexcept { return module_pos_; }
  Parameter& cls() noexcept { return cls_; }
  TransformerLayerParams& layer(std::size_t i) { return layers_.at(i); }

  /// Every trainable tensor, in a fixed order.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  EncoderVars bind(Tape& tape);

  /// rows (n x input_dim) -> n x d through the shared linear projection.
  Var project(const EncoderVars& vars, Var text_rows) const;

  /// Row i becomes proj(text_i) + lecture_pos[i] + module_pos[module(i)].
  Var position_aware_embed(const EncoderVars& vars, Var text_rows, std::span<const LectureSlot> layout) const;

  /// h = LN(x + MHAtt(x)); out = LN(h + FFN(h)). Keys flagged in `mask` get zero attention.
  Var transformer_layer(const EncoderVars& vars, std::size_t layer, Var x, std::span<const bool> mask = {}) const;

  /// Appends the CLS row to `lectures_hat`, layer-normalizes every row, runs
  /// every layer, returns the final CLS row (1 x d). `mask` flags padding rows of `lectures_hat`.
  Var encode_sequence(const EncoderVars& vars, Var lectures_hat, std::span<const bool> mask = {}) const;

  /// Full course encoding from lecture text vectors (n x input_dim) in layout order.
  Var encode_course(const EncoderVars& vars, Var text_rows, std::span<const LectureSlot> layout) const;

  /// Convenience: course vector for a corpus course, no gradient.
  std::vector<double> encode_course(const Corpus& corpus, std::size_t course, const TextEncoder& textenc);

 private:
  void check_layout(std::size_t rows, std::span<const LectureSlot> layout) const;

  EncoderConfig config_;
  Parameter proj_w_, proj_b_, lecture_pos_, module_pos_, cls_, embed_ln_gain_, embed_ln_bias_;
  std::vector<TransformerLayerParams> layers_;
};

/// n x dim matrix of text vectors for the lectures of a course, in layout order.
Tensor lecture_text_matrix(const Corpus& corpus, std::size_t course, const TextEncoder& textenc);

}  // namespace moocrep
