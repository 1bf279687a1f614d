// moocrep: pipeline driver.
//
//   moocrep synth --seed 7 --out run/
//   moocrep build-graph --out run/
//   moocrep train --config desk.cfg --out run/
//
// Exit status: 0 success, 1 validation error, 2 numeric failure.

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "moocrep/error.hpp"
#include "stages.hpp"

namespace {

struct Command {
  const char* name;
  const char* help;
  int (*run)(const moocrep::cli::StageArgs&);
};

constexpr Command kCommands[] = {
    {"ingest", "Validate a record-file corpus and copy it into the run directory", moocrep::cli::run_ingest},
    {"synth", "Generate a planted-structure synthetic corpus", moocrep::cli::run_synth},
    {"build-graph", "Build the explicit + implicit relation graph", moocrep::cli::run_build_graph},
    {"complexity", "Compute per-concept complexity records", moocrep::cli::run_complexity},
    {"train", "Train embeddings and write a checkpoint", moocrep::cli::run_train},
    {"export", "Write the embedding file from the checkpoint", moocrep::cli::run_export},
    {"eval-prereq", "Prerequisite classification on the embeddings", moocrep::cli::run_eval_prereq},
    {"eval-rec", "Next-lecture recommendation on the embeddings", moocrep::cli::run_eval_rec},
    {"grad-check", "Finite-difference check of the training gradients", moocrep::cli::run_grad_check},
    {"report", "Collect evaluation results into report.tsv", moocrep::cli::run_report},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Course, lecture and concept embeddings: training and evaluation pipeline"};
  app.require_subcommand(1);

  std::vector<moocrep::cli::StageArgs> args(std::size(kCommands));
  std::vector<std::string> config_paths(std::size(kCommands)), in_dirs(std::size(kCommands)),
      out_dirs(std::size(kCommands));
  std::vector<std::uint64_t> seeds(std::size(kCommands));
  std::vector<CLI::App*> subs;

  for (std::size_t i = 0; i < std::size(kCommands); ++i) {
    const Command& c = kCommands[i];
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    args[i].stage = c.name;
    sub->add_option("--config", config_paths[i], "Flat key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seeds[i], "Random seed (overrides the config)");
    auto* out = sub->add_option("--out", out_dirs[i], "Run directory for stage inputs and outputs");
    if (std::string_view(c.name) != "grad-check") out->required();
    if (std::string_view(c.name) == "ingest") sub->add_option("--in", in_dirs[i], "Directory with the record files")->required();
    if (std::string_view(c.name) == "train") sub->add_flag("--resume", args[i].resume, "Continue from checkpoint.bin");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    moocrep::cli::StageArgs& a = args[i];
    if (!config_paths[i].empty()) a.config_path = config_paths[i];
    if (subs[i]->count("--seed") > 0) a.seed = seeds[i];
    a.out = out_dirs[i];
    if (!in_dirs[i].empty()) a.in = in_dirs[i];
    try {
      return kCommands[i].run(a);
    } catch (const moocrep::NumericError& e) {
      fmt::print(stderr, "numeric failure: {}\n", e.what());
      return 2;
    } catch (const moocrep::ValidationError& e) {
      fmt::print(stderr, "error: {}\n", e.what());
      return 1;
    } catch (const std::exception& e) {
      fmt::print(stderr, "error: {}\n", e.what());
      return 1;
    }
  }
  return 1;
}
