#include "moocrep/optim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

Adam::Adam(AdamOptions options) : options_(options) {}

void Adam::restore(std::uint64_t step, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != v.size()) throw ShapeError("Adam::restore: moment list sizes differ");
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

void Adam::step(std::span<Parameter* const> params) {
  if (m_.empty() && step_ == 0) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError(fmt::format("Adam: state holds {} tensors but {} parameters were given", m_.size(), params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    if (p.value.shape() != m_[i].shape() || p.grad.shape() != p.value.shape()) {
      throw ShapeError(fmt::format("Adam: shape mismatch for parameter '{}'", p.name));
    }
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    auto w = p.value.data();
    auto g = p.grad.data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      w[k] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
    if (!p.value.all_finite()) throw NumericError(fmt::format("Adam update made '{}' non-finite", p.name));
  }
}

GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params, double h) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  auto evaluate = [&loss] {
    Tape tape;
    return loss(tape).item();
  };

  GradCheckReport report;
  for (Parameter* p : params) {
    auto values = p->value.data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double original = values[k];
      values[k] = original + h;
      const double up = evaluate();
      values[k] = original - h;
      const double down = evaluate();
      values[k] = original;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = p->name;
        report.worst_index = k;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace moocrep
