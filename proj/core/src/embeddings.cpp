#include "moocrep/embeddings.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

void EmbeddingSet::add(std::string id, std::span<const double> values) {
  if (values.size() != dim_) {
    throw ValidationError(fmt::format("embedding '{}' has {} values, expected dim={}", id, values.size(), dim_));
  }
  if (index_.contains(id)) throw ValidationError(fmt::format("duplicate embedding id '{}'", id));
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), values.begin(), values.end());
}

std::optional<std::size_t> EmbeddingSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingSet::at(std::string_view id) const {
  auto i = find(id);
  if (!i) throw ValidationError(fmt::format("no embedding for '{}'", id));
  return row(*i);
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  out << "dim=" << set.dim() << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << set.ids()[i] << '\t';
    const auto row = set.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out << ' ';
      out << fmt::format("{}", row[k]);
    }
    out << '\n';
  }
  if (!out) throw ValidationError(fmt::format("write to '{}' failed", path.string()));
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("dim=")) {
    throw ValidationError(fmt::format("{}:1: expected header 'dim=<d>'", path.string()));
  }
  std::size_t dim = 0;
  {
    const char* first = line.data() + 4;
    const char* last = line.data() + line.size();
    while (last > first && (last[-1] == '\r' || last[-1] == ' ')) --last;
    auto [ptr, ec] = std::from_chars(first, last, dim);
    if (ec != std::errc() || ptr != last || dim == 0) {
      throw ValidationError(fmt::format("{}:1: bad dimension in header '{}'", path.string(), line));
    }
  }
  EmbeddingSet set(dim);
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ValidationError(fmt::format("{}:{}: expected '<id>\\t<values>'", path.string(), line_no));
    }
    values.clear();
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ValidationError(fmt::format("{}:{}: bad number in row '{}'", path.string(), line_no, line.substr(0, tab)));
      }
      values.push_back(v);
      p = ptr;
    }
    try {
      set.add(line.substr(0, tab), values);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return set;
}

}  // namespace moocrep
