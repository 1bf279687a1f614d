#include "moocrep/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "moocrep/error.hpp"

namespace moocrep {

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

void Parameter::zero_grad() {
  if (grad.shape() != value.shape()) {
    grad = Tensor(value.shape());
  } else {
    grad.fill(0.0);
  }
}

const Tensor& Var::value() const { return tape_->value(index_); }

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite constant recorded on tape");
  nodes_.push_back(Node{std::move(value), std::nullopt, nullptr, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  if (!param.value.all_finite()) throw NumericError(fmt::format("parameter '{}' is not finite", param.name));
  nodes_.push_back(Node{param.value, std::nullopt, nullptr, &param, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backprop backprop) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backprop));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backprop backprop) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw Error("op mixes values from different tapes");
    needs = needs || nodes_[in.index()].needs_grad;
  }
  nodes_.push_back(Node{std::move(value), std::nullopt, needs ? std::move(backprop) : nullptr, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t index) {
  Node& node = nodes_[index];
  if (!node.grad) node.grad.emplace(node.value.shape());
  return *node.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw Error("backward() on a value from another tape");
  const Tensor& lv = value(loss.index());
  if (lv.size() != 1) throw ShapeError(fmt::format("backward() needs a scalar loss, got {}", shape_string(lv.shape())));
  for (auto& node : nodes_) node.grad.reset();
  grad(loss.index())[0] = 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.needs_grad || !node.grad) continue;
    if (node.param != nullptr) {
      Parameter& p = *node.param;
      if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
      auto dst = p.grad.data();
      auto src = node.grad->data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    if (node.backprop) node.backprop(*this, i);
  }
}

namespace {

void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NumericError(fmt::format("{} produced a non-finite value", op));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(fmt::format("{}: shape mismatch {} vs {}", op, shape_string(a.shape()), shape_string(b.shape())));
  }
}

void require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2) throw ShapeError(fmt::format("{}: expected rank-2 tensor, got {}", op, shape_string(a.shape())));
}

// dst += src
void accumulate(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
}

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw Error("op on an unbound Var");
  return *a.tape();
}

// C (m x n) += A (m x k) * B (k x n), with optional transposes of the stored operands.
void gemm_acc(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c) {
  const std::size_t m = c.rows();
  const std::size_t n = c.cols();
  const std::size_t k = ta ? a.rows() : a.cols();
  const auto ad = a.data();
  const auto bd = b.data();
  auto cd = c.data();
  const std::size_t acols = a.cols();
  const std::size_t bcols = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ta ? ad[p * acols + i] : ad[i * acols + p];
      if (av == 0.0) continue;
      double* crow = &cd[i * n];
      if (!tb) {
        const double* brow = &bd[p * bcols];
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * bd[j * bcols + p];
      }
    }
  }
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  check_finite(out, "add");
  const std::size_t ia = a.index(), ib = b.index();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.needs_grad(ia)) accumulate(tp.grad(ia), g);
    if (tp.needs_grad(ib)) accumulate(tp.grad(ib), g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] -= bv[k];
  check_finite(out, "sub");
  const std::size_t ia = a.index(), ib = b.index();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.needs_grad(ia)) accumulate(tp.grad(ia), g);
    if (tp.needs_grad(ib)) {
      auto d = tp.grad(ib).data();
      auto s = g.data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= s[k];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] *= bv[k];
  check_finite(out, "mul");
  const std::size_t ia = a.index(), ib = b.index();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const auto g = tp.grad(self).data();
    if (tp.needs_grad(ia)) {
      auto d = tp.grad(ia).data();
      auto other = tp.value(ib).data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += g[k] * other[k];
    }
    if (tp.needs_grad(ib)) {
      auto d = tp.grad(ib).data();
      auto other = tp.value(ia).data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += g[k] * other[k];
    }
  });
}

Var add_row(Var a, Var bias) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  require_rank2(av, "add_row");
  if (bv.rank() != 2 || bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ShapeError(fmt::format("add_row: bias {} does not fit {}", shape_string(bv.shape()), shape_string(av.shape())));
  }
  Tensor out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  check_finite(out, "add_row");
  const std::size_t ia = a.index(), ib = bias.index();
  return t.record(std::move(out), {a, bias}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.needs_grad(ia)) accumulate(tp.grad(ia), g);
    if (tp.needs_grad(ib)) {
      Tensor& gb = tp.grad(ib);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
      }
    }
  });
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  check_finite(out, "scale");
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia, factor](Tape& tp, std::size_t self) {
    auto g = tp.grad(self).data();
    auto d = tp.grad(ia).data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += factor * g[k];
  });
}

Var add_scalar(Var a, double offset) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v += offset;
  check_finite(out, "add_scalar");
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) { accumulate(tp.grad(ia), tp.grad(self)); });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  if (av.cols() != bv.rows()) {
    throw ShapeError(fmt::format("matmul: {} x {}", shape_string(av.shape()), shape_string(bv.shape())));
  }
  Tensor out = Tensor::zeros(av.rows(), bv.cols());
  gemm_acc(av, false, bv, false, out);
  check_finite(out, "matmul");
  const std::size_t ia = a.index(), ib = b.index();
  return t.record(std::move(out), {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    if (tp.needs_grad(ia)) gemm_acc(g, false, tp.value(ib), true, tp.grad(ia));
    if (tp.needs_grad(ib)) gemm_acc(tp.value(ia), true, g, false, tp.grad(ib));
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  Tensor out = Tensor::zeros(av.cols(), av.rows());
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c) out(c, r) = av(r, c);
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& d = tp.grad(ia);
    for (std::size_t r = 0; r < d.rows(); ++r)
      for (std::size_t c = 0; c < d.cols(); ++c) d(r, c) += g(c, r);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = tape_of(parts.front());
  const std::size_t cols = parts.front().value().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.value().cols() != cols) throw ShapeError("concat_rows: column count mismatch");
    rows += p.value().rows();
  }
  Tensor out = Tensor::zeros(rows, cols);
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const auto src = p.value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset * cols));
    offset += p.value().rows();
    ids.push_back(p.index());
  }
  return t.record(std::move(out), parts, [ids = std::move(ids), cols](Tape& tp, std::size_t self) {
    const auto g = tp.grad(self).data();
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const std::size_t n = tp.value(id).size();
      if (tp.needs_grad(id)) {
        auto d = tp.grad(id).data();
        for (std::size_t k = 0; k < n; ++k) d[k] += g[offset + k];
      }
      offset += n;
    }
    (void)cols;
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& t = tape_of(parts.front());
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += p.value().cols();
  }
  Tensor out = Tensor::zeros(rows, cols);
  std::vector<std::size_t> ids;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
    offset += pv.cols();
    ids.push_back(p.index());
  }
  return t.record(std::move(out), parts, [ids = std::move(ids)](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const std::size_t pc = tp.value(id).cols();
      if (tp.needs_grad(id)) {
        Tensor& d = tp.grad(id);
        for (std::size_t r = 0; r < d.rows(); ++r)
          for (std::size_t c = 0; c < pc; ++c) d(r, c) += g(r, offset + c);
      }
      offset += pc;
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  require_rank2(av, "slice_cols");
  if (begin + count > av.cols()) throw ShapeError("slice_cols: range exceeds column count");
  Tensor out = Tensor::zeros(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = av(r, begin + c);
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia, begin, count](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& d = tp.grad(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < count; ++c) d(r, begin + c) += g(r, c);
  });
}

Var select_row(Var a, std::size_t r) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  require_rank2(av, "select_row");
  if (r >= av.rows()) throw ShapeError(fmt::format("select_row: row {} out of {}", r, av.rows()));
  Tensor out = Tensor::row_vector(av.row(r));
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia, r](Tape& tp, std::size_t self) {
    const auto g = tp.grad(self).data();
    auto d = tp.grad(ia).row(r);
    for (std::size_t c = 0; c < d.size(); ++c) d[c] += g[c];
  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const auto g = tp.grad(self).data();
    const auto x = tp.value(ia).data();
    auto d = tp.grad(ia).data();
    for (std::size_t k = 0; k < d.size(); ++k)
      if (x[k] > 0.0) d[k] += g[k];
  });
}

Var hinge(Var a) { return relu(a); }

Var square(Var a) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v * v;
  check_finite(out, "square");
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const auto g = tp.grad(self).data();
    const auto x = tp.value(ia).data();
    auto d = tp.grad(ia).data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += 2.0 * x[k] * g[k];
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  Tensor out = Tensor::scalar(s);
  check_finite(out, "sum");
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& d : tp.grad(ia).data()) d += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var softmax_rows(Var a, std::span<const bool> key_mask) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  require_rank2(av, "softmax_rows");
  if (!key_mask.empty() && key_mask.size() != av.cols()) throw ShapeError("softmax_rows: mask length mismatch");
  std::vector<bool> masked(av.cols(), false);
  for (std::size_t j = 0; j < key_mask.size(); ++j) masked[j] = key_mask[j];
  Tensor out = Tensor::zeros(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    const auto x = av.row(r);
    auto y = out.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < x.size(); ++j)
      if (!masked[j]) mx = std::max(mx, x[j]);
    if (!std::isfinite(mx)) throw NumericError("softmax_rows: every key is masked");
    double z = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (masked[j]) continue;
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (double& v : y) v /= z;
  }
  check_finite(out, "softmax_rows");
  const std::size_t ia = a.index();
  return t.record(std::move(out), {a}, [ia](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& d = tp.grad(ia);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      const auto yr = y.row(r);
      const auto gr = g.row(r);
      double inner = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j) inner += yr[j] * gr[j];
      auto dr = d.row(r);
      for (std::size_t j = 0; j < yr.size(); ++j) dr[j] += yr[j] * (gr[j] - inner);
    }
  });
}

Var layer_norm_rows(Var a, Var gain, Var bias, double eps) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  require_rank2(av, "layer_norm_rows");
  const std::size_t n = av.cols();
  if (gain.value().shape() != Shape{1, n} || bias.value().shape() != Shape{1, n}) {
    throw ShapeError("layer_norm_rows: gain/bias must be 1 x n");
  }
  // Normalized rows and the per-row inverse standard deviation, kept for backprop.
  Tensor xhat = Tensor::zeros(av.rows(), n);
  std::vector<double> inv_std(av.rows());
  Tensor out = Tensor::zeros(av.rows(), n);
  const auto g = gain.value().data();
  const auto b = bias.value().data();
  for (std::size_t r = 0; r < av.rows(); ++r) {
    const auto x = av.row(r);
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    // A constant row with eps == 0 normalizes to zero instead of dividing by zero.
    const double inv = (var + eps) > 0.0 ? 1.0 / std::sqrt(var + eps) : 0.0;
    inv_std[r] = inv;
    auto xh = xhat.row(r);
    auto y = out.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      xh[c] = (x[c] - mu) * inv;
      y[c] = xh[c] * g[c] + b[c];
    }
  }
  check_finite(out, "layer_norm_rows");
  const std::size_t ia = a.index(), ig = gain.index(), ib = bias.index();
  return t.record(std::move(out), {a, gain, bias},
                  [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp, std::size_t self) {
                    const Tensor& gy = tp.grad(self);
                    const auto gv = tp.value(ig).data();
                    const std::size_t n = gy.cols();
                    const double nd = static_cast<double>(n);
                    std::vector<double> dxhat(n);
                    for (std::size_t r = 0; r < gy.rows(); ++r) {
                      const auto dy = gy.row(r);
                      const auto xh = xhat.row(r);
                      if (tp.needs_grad(ig)) {
                        auto dg = tp.grad(ig).data();
                        for (std::size_t c = 0; c < n; ++c) dg[c] += dy[c] * xh[c];
                      }
                      if (tp.needs_grad(ib)) {
                        auto db = tp.grad(ib).data();
                        for (std::size_t c = 0; c < n; ++c) db[c] += dy[c];
                      }
                      if (tp.needs_grad(ia)) {
                        double s1 = 0.0, s2 = 0.0;
                        for (std::size_t c = 0; c < n; ++c) {
                          dxhat[c] = dy[c] * gv[c];
                          s1 += dxhat[c];
                          s2 += dxhat[c] * xh[c];
                        }
                        auto dx = tp.grad(ia).row(r);
                        const double inv = inv_std[r];
                        for (std::size_t c = 0; c < n; ++c) dx[c] += inv / nd * (nd * dxhat[c] - s1 - xh[c] * s2);
                      }
                    }
                  });
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

Var cosine(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "cosine");
  const auto x = a.value().data();
  const auto y = b.value().data();
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xy += x[k] * y[k];
    xx += x[k] * x[k];
    yy += y[k] * y[k];
  }
  const double nx = std::sqrt(xx);
  const double ny = std::sqrt(yy);
  if (nx < 1e-12 || ny < 1e-12) throw NumericError("cosine of a degenerate (near-zero) vector");
  const double c = xy / (nx * ny);
  Tensor out = Tensor::scalar(c);
  check_finite(out, "cosine");
  const std::size_t ia = a.index(), ib = b.index();
  return t.record(std::move(out), {a, b}, [ia, ib, nx, ny, c](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const auto x = tp.value(ia).data();
    const auto y = tp.value(ib).data();
    if (tp.needs_grad(ia)) {
      auto d = tp.grad(ia).data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += g * (y[k] / (nx * ny) - c * x[k] / (nx * nx));
    }
    if (tp.needs_grad(ib)) {
      auto d = tp.grad(ib).data();
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += g * (x[k] / (nx * ny) - c * y[k] / (ny * ny));
    }
  });
}

Var bce_with_logits(Var logits, std::span<const double> targets) {
  Tape& t = tape_of(logits);
  const Tensor& z = logits.value();
  if (z.size() != targets.size() || z.size() == 0) throw ShapeError("bce_with_logits: target count mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double v = z[k];
    total += std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))) - targets[k] * v;
  }
  const double n = static_cast<double>(z.size());
  Tensor out = Tensor::scalar(total / n);
  check_finite(out, "bce_with_logits");
  const std::size_t iz = logits.index();
  std::vector<double> tg(targets.begin(), targets.end());
  return t.record(std::move(out), {logits}, [iz, tg = std::move(tg), n](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const auto z = tp.value(iz).data();
    auto d = tp.grad(iz).data();
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double s = 1.0 / (1.0 + std::exp(-z[k]));
      d[k] += g * (s - tg[k]) / n;
    }
  });
}

Var operator+(Var a, Var b) { return add(a, b); }
Var operator-(Var a, Var b) { return sub(a, b); }
Var operator*(double factor, Var a) { return scale(a, factor); }

}  // namespace moocrep
