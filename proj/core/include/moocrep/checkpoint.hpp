#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "moocrep/tensor.hpp"

namespace moocrep {

/// Versioned binary container. Layout (little-endian):
///   "MREP" | u32 version | u64 len, config text | u64 epoch | u64 count |
///   count x (u64 len, name | u64 rank | rank x u64 dim | raw f64 data)
struct CheckpointData {
  static constexpr std::uint32_t kVersion = 1;

  std::string config_text;
  std::uint64_t epoch = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;

  /// Tensor by name; throws ValidationError when absent.
  const Tensor& tensor(const std::string& name) const;
};

void write_checkpoint(const CheckpointData& data, const std::filesystem::path& path);
CheckpointData read_checkpoint(const std::filesystem::path& path);

}  // namespace moocrep
