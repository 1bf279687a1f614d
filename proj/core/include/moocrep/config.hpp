#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace moocrep {

/// Flat key=value configuration. One entry per line; '#' starts a comment;
/// surrounding whitespace is trimmed. Later duplicates override earlier ones.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view source = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(std::string_view key) const { return values_.contains(std::string(key)); }
  std::optional<std::string> get(std::string_view key) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;

  const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

  /// Sorted "key=value" lines.
  std::string to_text() const;
  /// 16-hex-digit FNV-1a hash of to_text().
  std::string hash() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Shortest round-trip decimal for a double.
std::string format_double(double value);

}  // namespace moocrep
