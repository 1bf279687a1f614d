#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <span>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "moocrep/corpus.hpp"
#include "oracles/corpora.hpp"
#include "moocrep/optim.hpp"

namespace moocrep::testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(MOOCREP_FIXTURES) / name; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string tag = info ? std::string(info->test_suite_name()) + "." + info->name() : "moocrep";
    path_ = std::filesystem::temp_directory_path() /
            ("moocrep-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

struct MixedCheck {
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  std::string worst;
  double worst_excess = 0.0;  // |a - n| / (rtol * max(|a|, |n|) + atol) of the worst element
};

/// Independent central-difference comparison with an allclose-style bound:
/// |a - n| <= rtol * max(|a|, |n|) + atol.
inline MixedCheck mixed_gradient_check(const LossBuilder& loss, std::span<Parameter* const> params, double h,
                                       double rtol, double atol) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  MixedCheck out;
  for (Parameter* p : params) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      double& slot = p->value.data()[k];
      const double original = slot;
      slot = original + h;
      double up;
      {
        Tape tape;
        up = loss(tape).item();
      }
      slot = original - h;
      double down;
      {
        Tape tape;
        down = loss(tape).item();
      }
      slot = original;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.data()[k];
      const double bound = rtol * std::max(std::abs(analytic), std::abs(numeric)) + atol;
      const double excess = std::abs(analytic - numeric) / bound;
      ++out.checked;
      if (excess > 1.0) ++out.mismatches;
      if (excess > out.worst_excess) {
        out.worst_excess = excess;
        out.worst = p->name + "[" + std::to_string(k) + "] analytic " + std::to_string(analytic) + " numeric " +
                    std::to_string(numeric);
      }
    }
  }
  return out;
}

}  // namespace moocrep::testing
