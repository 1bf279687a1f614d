#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "moocrep/autodiff.hpp"

namespace moocrep {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Moment buffers are bound positionally to the
/// parameter list passed to step(); the list must keep the same order.
class Adam {
 public:
  explicit Adam(AdamOptions options = {});

  void step(std::span<Parameter* const> params);

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t step_count() const noexcept { return step_; }
  const std::vector<Tensor>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor>& second_moments() const noexcept { return v_; }

  /// Restores saved state; shapes are validated on the next step().
  void restore(std::uint64_t step, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares tape gradients against central differences (f(x+h) - f(x-h)) / 2h
/// for every element of every parameter. Relative error uses the denominator
/// max(|analytic|, |numeric|, 1e-8). Parameter values are restored on return.
GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params, double h = 1e-6);

}  // namespace moocrep
