#include <array>
#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "moocrep/autodiff.hpp"
#include "moocrep/error.hpp"
#include "moocrep/optim.hpp"

namespace moocrep {
namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor t = Tensor::zeros(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

TEST(Tensor, RejectsMismatchedBuffer) { EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError); }

TEST(Ops, SoftmaxOfZerosIsUniform) {
  Tape tape;
  const Var s = softmax_rows(tape.constant(Tensor::zeros(1, 3)));
  for (double v : s.value().data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Ops, SoftmaxRowsSumToOneAndMaskedKeysGetNothing) {
  std::mt19937_64 rng(2);
  Tape tape;
  const Var x = tape.constant(random_tensor(4, 5, rng, 10.0));
  const std::array<bool, 5> mask{false, true, false, false, true};
  const Var s = softmax_rows(x, mask);
  for (std::size_t r = 0; r < 4; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 5; ++c) total += s.value()(r, c);
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(s.value()(r, 1), 0.0);
    EXPECT_EQ(s.value()(r, 4), 0.0);
  }
  const std::array<bool, 5> all{true, true, true, true, true};
  EXPECT_THROW(softmax_rows(x, all), NumericError);
}

TEST(Ops, LayerNormOfOneTwoThree) {
  Tape tape;
  const Var x = tape.constant(Tensor::from_rows({{1.0, 2.0, 3.0}}));
  const Var y = layer_norm_rows(x, tape.constant(Tensor::filled(1, 3, 1.0)), tape.constant(Tensor::zeros(1, 3)), 0.0);
  EXPECT_NEAR(y.value()(0, 0), -std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(y.value()(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(y.value()(0, 2), std::sqrt(1.5), 1e-12);

  const Var affine =
      layer_norm_rows(x, tape.constant(Tensor::filled(1, 3, 2.0)), tape.constant(Tensor::filled(1, 3, 0.5)), 0.0);
  EXPECT_NEAR(affine.value()(0, 2), 2.0 * std::sqrt(1.5) + 0.5, 1e-12);
}

TEST(Ops, LayerNormMomentsAndConstantRows) {
  std::mt19937_64 rng(5);
  Tape tape;
  Tensor in = random_tensor(6, 16, rng, 3.0);
  for (double& v : in.row(5)) v = 4.0;
  const Var y = layer_norm_rows(tape.constant(in), tape.constant(Tensor::filled(1, 16, 1.0)),
                                tape.constant(Tensor::zeros(1, 16)), 1e-5);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0, var = 0.0, in_var = 0.0, in_mean = 0.0;
    for (std::size_t c = 0; c < 16; ++c) {
      mean += y.value()(r, c) / 16.0;
      in_mean += in(r, c) / 16.0;
    }
    for (std::size_t c = 0; c < 16; ++c) {
      var += (y.value()(r, c) - mean) * (y.value()(r, c) - mean) / 16.0;
      in_var += (in(r, c) - in_mean) * (in(r, c) - in_mean) / 16.0;
    }
    EXPECT_LT(std::abs(mean), 1e-12);
    // variance is in_var / (in_var + eps) by construction
    EXPECT_NEAR(var, in_var / (in_var + 1e-5), 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-5 / in_var + 1e-9);
  }
  for (std::size_t c = 0; c < 16; ++c) EXPECT_EQ(y.value()(5, c), 0.0);
}

TEST(Ops, ReluClampsNegatives) {
  Tape tape;
  const Var y = relu(tape.constant(Tensor::from_rows({{-2.0, 0.0, 3.0}})));
  EXPECT_EQ(y.value()(0, 0), 0.0);
  EXPECT_EQ(y.value()(0, 1), 0.0);
  EXPECT_EQ(y.value()(0, 2), 3.0);
}

TEST(Ops, ShapeMismatchAndNonFinite) {
  Tape tape;
  const Var a = tape.constant(Tensor::zeros(2, 3));
  const Var b = tape.constant(Tensor::zeros(2, 2));
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(matmul(a, b), ShapeError);
  EXPECT_THROW(tape.constant(Tensor::filled(1, 1, std::nan(""))), NumericError);
  const Var big = tape.constant(Tensor::filled(1, 1, 1e200));
  EXPECT_THROW(mul(big, big), NumericError);
}

TEST(Ops, Deterministic) {
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor(3, 4, rng), w = random_tensor(4, 4, rng);
  auto run = [&] {
    Tape tape;
    return softmax_rows(matmul(tape.constant(x), tape.constant(w))).value();
  };
  const Tensor first = run();
  const Tensor second = run();
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first.data()[i], second.data()[i]);
}

TEST(Backward, SumGivesOnes) {
  Parameter p("p", Tensor::from_rows({{1.0, -2.0, 5.0}}));
  p.zero_grad();
  Tape tape;
  tape.backward(sum(tape.parameter(p)));
  for (double g : p.grad.data()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SquaredNormGivesTwiceP) {
  Parameter p("p", Tensor::from_rows({{1.0, -2.0}}));
  p.zero_grad();
  Tape tape;
  tape.backward(sum(square(tape.parameter(p))));
  EXPECT_EQ(p.grad(0, 0), 2.0);
  EXPECT_EQ(p.grad(0, 1), -4.0);
}

TEST(Backward, UnreachableParameterStaysZero) {
  Parameter used("used", Tensor::filled(1, 2, 1.0));
  Parameter bound("bound", Tensor::filled(1, 2, 1.0));
  Parameter absent("absent", Tensor::filled(1, 2, 1.0));
  for (Parameter* p : {&used, &bound, &absent}) p->zero_grad();
  Tape tape;
  const Var u = tape.parameter(used);
  tape.parameter(bound);
  tape.backward(sum(u));
  for (double g : bound.grad.data()) EXPECT_EQ(g, 0.0);
  for (double g : absent.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, RejectsNonScalarLoss) {
  Tape tape;
  EXPECT_THROW(tape.backward(tape.constant(Tensor::zeros(1, 2))), ShapeError);
}

TEST(GradCheck, QuadraticIsExactToRounding) {
  Parameter p("p", Tensor::from_rows({{0.3, -1.2, 2.0}, {0.7, 0.1, -0.4}}));
  std::vector<Parameter*> params{&p};
  const GradCheckReport r = grad_check([&](Tape& t) { return sum(square(t.parameter(p))); }, params, 1e-6);
  EXPECT_LT(r.max_relative_error, 1e-9);
  EXPECT_EQ(r.checked, 6u);
}

TEST(GradCheck, ZeroFunctionHasZeroError) {
  Parameter p("p", Tensor::filled(2, 2, 0.5));
  std::vector<Parameter*> params{&p};
  const GradCheckReport r = grad_check([&](Tape& t) { return scale(sum(t.parameter(p)), 0.0); }, params);
  EXPECT_EQ(r.max_relative_error, 0.0);
}

// Each composite op inside a random linear read-out, checked on 20 seeds.
struct OpCase {
  const char* name;
  std::function<Var(Tape&, Var, Var)> build;  // (tape, x, y) -> any-shape output
  std::size_t x_rows, x_cols, y_rows, y_cols;
};

class OpGradients : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradients, CentralDifferencesAgree) {
  const OpCase& op = GetParam();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Parameter x("x", random_tensor(op.x_rows, op.x_cols, rng));
    Parameter y("y", random_tensor(op.y_rows, op.y_cols, rng));
    Tensor readout;
    {
      Tape probe;
      const Var out = op.build(probe, probe.parameter(x), probe.parameter(y));
      readout = random_tensor(out.rows(), out.cols(), rng);
    }
    std::vector<Parameter*> params{&x, &y};
    const GradCheckReport r = grad_check(
        [&](Tape& t) { return sum(mul(op.build(t, t.parameter(x), t.parameter(y)), t.constant(readout))); }, params,
        1e-6);
    EXPECT_LT(r.max_relative_error, 1e-5) << op.name << " seed " << seed << " worst " << r.worst_parameter << "["
                                          << r.worst_index << "] analytic " << r.analytic << " numeric " << r.numeric;
  }
}

const std::array<bool, 4> kMask{false, false, true, false};

INSTANTIATE_TEST_SUITE_P(
    Composite, OpGradients,
    ::testing::Values(
        OpCase{"matmul", [](Tape&, Var x, Var y) { return matmul(x, y); }, 3, 4, 4, 2},
        OpCase{"add_row", [](Tape&, Var x, Var y) { return add_row(x, y); }, 3, 4, 1, 4},
        OpCase{"sub_mul", [](Tape&, Var x, Var y) { return mul(sub(x, y), y); }, 2, 3, 2, 3},
        OpCase{"transpose", [](Tape&, Var x, Var y) { return matmul(x, transpose(y)); }, 2, 3, 4, 3},
        OpCase{"softmax",
               [](Tape&, Var x, Var) { return softmax_rows(x); }, 3, 4, 1, 1},
        OpCase{"masked_softmax",
               [](Tape&, Var x, Var) { return softmax_rows(x, kMask); }, 3, 4, 1, 1},
        OpCase{"layer_norm",
               [](Tape&, Var x, Var y) { return layer_norm_rows(x, select_row(y, 0), select_row(y, 1), 1e-5); }, 3,
               5, 2, 5},
        OpCase{"attention",
               [](Tape&, Var x, Var y) {
                 const Var q = matmul(x, y);
                 return matmul(softmax_rows(scale(matmul(q, transpose(x)), 0.5)), x);
               },
               4, 3, 3, 3},
        OpCase{"concat_slice",
               [](Tape&, Var x, Var y) {
                 const std::array<Var, 2> cols{slice_cols(x, 1, 2), y};
                 const std::array<Var, 2> rows{concat_cols(cols), select_row(concat_cols(cols), 0)};
                 return concat_rows(rows);
               },
               2, 4, 2, 3},
        OpCase{"cosine", [](Tape&, Var x, Var y) { return cosine(x, y); }, 1, 6, 1, 6},
        OpCase{"dot", [](Tape&, Var x, Var y) { return dot(x, y); }, 1, 6, 1, 6},
        OpCase{"mean_square", [](Tape&, Var x, Var) { return mean(square(add_scalar(x, 0.3))); }, 3, 3, 1, 1},
        OpCase{"hinge", [](Tape&, Var x, Var y) { return hinge(add_scalar(mul(x, y), 0.1)); }, 2, 3, 2, 3},
        OpCase{"relu_ffn", [](Tape&, Var x, Var y) { return relu(matmul(x, y)); }, 3, 4, 4, 5},
        OpCase{"bce",
               [](Tape&, Var x, Var) {
                 const std::array<double, 4> targets{1.0, 0.0, 0.0, 1.0};
                 return bce_with_logits(x, targets);
               },
               4, 1, 1, 1}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Parameter p("p", Tensor::from_rows({{0.5, -0.25}}));
  p.zero_grad();
  Adam adam(AdamOptions{0.1});
  std::vector<Parameter*> params{&p};
  adam.step(params);
  EXPECT_EQ(p.value(0, 0), 0.5);
  EXPECT_EQ(p.value(0, 1), -0.25);
  EXPECT_EQ(adam.step_count(), 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("p", Tensor::scalar(0.0));
  p.zero_grad();
  p.grad.data()[0] = 1.0;
  Adam adam(AdamOptions{0.1, 0.9, 0.999, 1e-8});
  std::vector<Parameter*> params{&p};
  adam.step(params);
  EXPECT_NEAR(p.value.item(), -0.1, 1e-8);
}

TEST(Adam, IdenticalStatesGiveIdenticalSteps) {
  auto run = [] {
    Parameter p("p", Tensor::from_rows({{1.0, 2.0, 3.0}}));
    Adam adam(AdamOptions{0.01});
    std::vector<Parameter*> params{&p};
    for (int i = 0; i < 5; ++i) {
      p.zero_grad();
      Tape tape;
      tape.backward(sum(square(tape.parameter(p))));
      adam.step(params);
    }
    return p.value;
  };
  const Tensor a = run(), b = run();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
}

TEST(Adam, ShapeMismatchAfterRestore) {
  Parameter p("p", Tensor::zeros(2, 2));
  p.zero_grad();
  Adam adam;
  adam.restore(1, {Tensor::zeros(1, 2)}, {Tensor::zeros(1, 2)});
  std::vector<Parameter*> params{&p};
  EXPECT_THROW(adam.step(params), ShapeError);
}

}  // namespace
}  // namespace moocrep
