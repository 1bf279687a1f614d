#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace moocrep {

struct TextVector {
  std::vector<double> values;
  bool empty_text = false;  // set when the input had no tokens; values are then all zero
};

/// Lowercased tokens split on ASCII whitespace and punctuation. Bytes >= 0x80
/// are kept as token characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Stable 64-bit FNV-1a hash.
std::uint64_t stable_hash(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Text-to-vector encoder. The fallback kind hashes token counts into a
/// signed feature vector and L2-normalizes it; the precomputed kind serves
/// vectors read from an embedding file, keyed by entity id.
class TextEncoder {
 public:
  enum class Kind { FallbackHash, Precomputed };

  static constexpr std::size_t kDefaultDim = 256;
  static constexpr std::size_t kMaxTokens = 1024;

  static TextEncoder fallback(std::size_t dim = kDefaultDim);
  /// Reads the embedding exchange format ("dim=<d>" header, then
  /// "<id>\t<v1> ... <vd>" rows).
  static TextEncoder load_precomputed(const std::filesystem::path& path);
  static TextEncoder from_vectors(std::size_t dim, std::unordered_map<std::string, std::vector<double>> vectors);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  /// Fallback encoding of raw text. Throws ValidationError on a precomputed encoder.
  TextVector encode_text(std::string_view text) const;

  /// Vector for an entity: precomputed encoders look up `id` (throwing
  /// ValidationError when absent); fallback encoders hash `text`.
  TextVector encode(std::string_view id, std::string_view text) const;

 private:
  TextEncoder(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

}  // namespace moocrep
