#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace moocrep {

/// Ordered id -> vector table, the in-memory form of the embedding exchange
/// format. All rows share one dimension.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dim = 0) : dim_(dim) {}

  /// Throws ValidationError on a duplicate id or a row of the wrong length.
  void add(std::string id, std::span<const double> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const std::string> ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t i) const { return std::span<const double>(data_).subspan(i * dim_, dim_); }

  bool contains(std::string_view id) const { return index_.contains(std::string(id)); }
  std::optional<std::size_t> find(std::string_view id) const;
  /// Row for an id; throws ValidationError when absent.
  std::span<const double> at(std::string_view id) const;

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// UTF-8 text: line 1 "dim=<d>", then one "<id>\t<v1> <v2> ... <vd>" line per
/// entity with shortest round-trip decimal floats, so a write/read cycle is
/// bit-exact.
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet read_embeddings(const std::filesystem::path& path);

}  // namespace moocrep
