#include "moocrep/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'R', 'E', 'P'};

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T get() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) fail("truncated file");
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    if (n > (1ULL << 32)) fail("implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
    return s;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(fmt::format("checkpoint '{}': {}", path_, what));
  }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace

const Tensor& CheckpointData::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ValidationError(fmt::format("checkpoint has no tensor '{}'", name));
}

void write_checkpoint(const CheckpointData& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  out.write(kMagic, sizeof(kMagic));
  Writer w(out);
  w.put<std::uint32_t>(CheckpointData::kVersion);
  w.put_string(data.config_text);
  w.put<std::uint64_t>(data.epoch);
  w.put<std::uint64_t>(data.tensors.size());
  for (const auto& [name, t] : data.tensors) {
    w.put_string(name);
    w.put<std::uint64_t>(t.rank());
    for (std::size_t dim : t.shape()) w.put<std::uint64_t>(dim);
    const auto values = t.data();
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  }
  if (!out) throw ValidationError(fmt::format("write to '{}' failed", path.string()));
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open checkpoint '{}'", path.string()));
  Reader r(in, path.string());
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) r.fail("bad magic bytes");
  const auto version = r.get<std::uint32_t>();
  if (version != CheckpointData::kVersion) r.fail(fmt::format("unsupported format version {}", version));
  CheckpointData data;
  data.config_text = r.get_string();
  data.epoch = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.get_string();
    const auto rank = r.get<std::uint64_t>();
    if (rank > 8) r.fail(fmt::format("tensor '{}' has implausible rank {}", name, rank));
    Shape shape(rank);
    std::size_t elements = 1;
    for (auto& dim : shape) {
      dim = r.get<std::uint64_t>();
      elements *= dim;
    }
    std::vector<double> values(elements);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(elements * sizeof(double)));
    if (!in) r.fail(fmt::format("tensor '{}' is truncated", name));
    data.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return data;
}

}  // namespace moocrep
