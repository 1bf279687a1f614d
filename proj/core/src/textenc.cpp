#include "moocrep/textenc.hpp"

#include <cmath>

#include <fmt/format.h>

#include "moocrep/embeddings.hpp"
#include "moocrep/error.hpp"

namespace moocrep {

namespace {

// Basis for the sign hash; any constant distinct from the FNV offset works.
constexpr std::uint64_t kSignBasis = 0x84222325cbf29ce4ULL;

bool is_token_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t stable_hash(std::string_view text, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

TextEncoder TextEncoder::fallback(std::size_t dim) {
  if (dim == 0) throw ValidationError("text encoder dimension must be positive");
  return TextEncoder(Kind::FallbackHash, dim);
}

TextEncoder TextEncoder::from_vectors(std::size_t dim, std::unordered_map<std::string, std::vector<double>> vectors) {
  if (dim == 0) throw ValidationError("text encoder dimension must be positive");
  for (const auto& [id, v] : vectors) {
    if (v.size() != dim) throw ValidationError(fmt::format("vector for '{}' has {} values, expected {}", id, v.size(), dim));
  }
  TextEncoder enc(Kind::Precomputed, dim);
  enc.vectors_ = std::move(vectors);
  return enc;
}

TextEncoder TextEncoder::load_precomputed(const std::filesystem::path& path) {
  const EmbeddingSet set = read_embeddings(path);
  std::unordered_map<std::string, std::vector<double>> vectors;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.row(i);
    vectors.emplace(set.ids()[i], std::vector<double>(row.begin(), row.end()));
  }
  return from_vectors(set.dim(), std::move(vectors));
}

TextVector TextEncoder::encode_text(std::string_view text) const {
  if (kind_ != Kind::FallbackHash) throw ValidationError("encode_text() needs a fallback encoder");
  TextVector out{std::vector<double>(dim_, 0.0), false};
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.size() > kMaxTokens) tokens.resize(kMaxTokens);
  if (tokens.empty()) {
    out.empty_text = true;
    return out;
  }
  for (const std::string& tok : tokens) {
    const std::size_t slot = stable_hash(tok) % dim_;
    const double sign = (stable_hash(tok, kSignBasis) & 1U) != 0 ? -1.0 : 1.0;
    out.values[slot] += sign;
  }
  double norm = 0.0;
  for (double v : out.values) norm += v * v;
  norm = std::sqrt(norm);
  // Signed collisions can cancel every bucket; report that like empty text.
  if (norm == 0.0) {
    out.empty_text = true;
    return out;
  }
  for (double& v : out.values) v /= norm;
  return out;
}

TextVector TextEncoder::encode(std::string_view id, std::string_view text) const {
  if (kind_ == Kind::FallbackHash) return encode_text(text);
  auto it = vectors_.find(std::string(id));
  if (it == vectors_.end()) throw ValidationError(fmt::format("no precomputed vector for '{}'", id));
  return TextVector{it->second, false};
}

}  // namespace moocrep
