#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "moocrep/config.hpp"

namespace moocrep::cli {

struct StageArgs {
  std::string stage;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::optional<std::filesystem::path> in;
  bool resume = false;
};

// Each returns the process exit code. Library exceptions propagate.
int run_ingest(const StageArgs& args);
int run_synth(const StageArgs& args);
int run_build_graph(const StageArgs& args);
int run_complexity(const StageArgs& args);
int run_train(const StageArgs& args);
int run_export(const StageArgs& args);
int run_eval_prereq(const StageArgs& args);
int run_eval_rec(const StageArgs& args);
int run_grad_check(const StageArgs& args);
int run_report(const StageArgs& args);

}  // namespace moocrep::cli
