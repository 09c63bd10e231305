#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support/gradcheck.hpp"
#include "whinpjf/autodiff/parameters.hpp"
#include "whinpjf/autodiff/tape.hpp"
#include "whinpjf/common/error.hpp"
#include "whinpjf/common/random.hpp"

namespace whinpjf {
namespace {

using ad::Matrix;
using ad::Tape;
using ad::Var;
using testing::gradient_check;

Matrix<double> random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix<double> m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

/// Random inputs kept away from the relu kink so that finite differences
/// are meaningful.
Matrix<double> away_from_zero(std::size_t r, std::size_t c, Rng& rng) {
  Matrix<double> m(r, c);
  for (double& v : m.values()) {
    do v = rng.uniform(-1.0, 1.0);
    while (std::abs(v) < 0.05);
  }
  return m;
}

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const auto b = Matrix<float>::from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(ad::matmul(Matrix<float>::identity(2), b), b);
}

TEST(Matmul, HandArithmetic) {
  const auto c = ad::matmul(Matrix<float>::from_rows({{1, 2}}), Matrix<float>::from_rows({{3}, {4}}));
  ASSERT_EQ(c.rows(), 1u);
  ASSERT_EQ(c.cols(), 1u);
  EXPECT_EQ(c(0, 0), 11.0f);
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  Tape<float> tape;
  const Var a = tape.constant(Matrix<float>(2, 3));
  const Var b = tape.constant(Matrix<float>(2, 3));
  try {
    tape.matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("2x3"), std::string::npos) << what;
  }
}

TEST(Matmul, GradientOfSumMatchesFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = gradient_check({random_matrix(3, 4, rng), random_matrix(4, 2, rng)},
                            [](Tape<double>& t, const std::vector<Var>& v) {
                              return t.sum_all(t.matmul(v[0], v[1]));
                            });
    ASSERT_LT(r.max_rel_error, 1e-4) << r.worst;
  }
}

TEST(Elementwise, ReluAndSigmoidDefinitions) {
  Tape<float> tape;
  const Var x = tape.constant(Matrix<float>::from_rows({{-1.0f, 2.5f, 0.0f}}));
  const auto& r = tape.value(tape.relu(x));
  EXPECT_EQ(r(0, 0), 0.0f);
  EXPECT_EQ(r(0, 1), 2.5f);
  EXPECT_EQ(tape.value(tape.sigmoid(x))(0, 2), 0.5f);
}

TEST(Elementwise, SigmoidIsStableForLargeInputs) {
  Tape<float> tape;
  const Var x = tape.constant(Matrix<float>::from_rows({{-1000.0f, 1000.0f}}));
  const auto& s = tape.value(tape.sigmoid(x));
  EXPECT_EQ(s(0, 0), 0.0f);
  EXPECT_EQ(s(0, 1), 1.0f);
}

TEST(Elementwise, BinaryShapeMismatchThrows) {
  Tape<float> tape;
  const Var a = tape.constant(Matrix<float>(2, 2));
  const Var b = tape.constant(Matrix<float>(2, 3));
  EXPECT_THROW(tape.add(a, b), DimensionError);
  EXPECT_THROW(tape.mul(a, b), DimensionError);
  EXPECT_THROW(tape.sub(a, b), DimensionError);
}

TEST(Elementwise, AllBackwardRulesMatchFiniteDifferences) {
  Rng rng(12);
  // Each loss is weighted by a fixed random matrix so that gradients differ
  // per entry.
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = random_matrix(3, 4, rng);
    auto weighted = [w](Tape<double>& t, Var y) { return t.sum_all(t.mul(y, t.constant(w))); };
    std::vector<std::pair<const char*, testing::LossBuilder>> cases = {
        {"add", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.add(v[0], v[1])); }},
        {"sub", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.sub(v[0], v[1])); }},
        {"mul", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.mul(v[0], v[1])); }},
        {"scale", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.scale(v[0], -1.7)); }},
        {"relu", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.relu(v[0])); }},
        {"sigmoid", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.sigmoid(v[0])); }},
    };
    const auto a = away_from_zero(3, 4, rng);
    const auto b = random_matrix(3, 4, rng);
    for (const auto& [name, build] : cases) {
      auto r = gradient_check({a, b}, build);
      ASSERT_LT(r.max_rel_error, 1e-4) << name << " " << r.worst;
    }
  }
}

TEST(Reduce, SoftmaxOfZerosIsUniform) {
  Tape<float> tape;
  const auto& s = tape.value(tape.softmax_rows(tape.constant(Matrix<float>(1, 3))));
  for (std::size_t c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(s(0, c), 1.0f / 3.0f);
}

TEST(Reduce, MeanOfSingleRowIsThatRow) {
  Tape<float> tape;
  const auto row = Matrix<float>::from_rows({{1.5f, -2.0f, 3.0f}});
  EXPECT_EQ(tape.value(tape.mean_rows(tape.constant(row))), row);
}

TEST(Reduce, ConcatColsKeepsOrder) {
  Tape<float> tape;
  const Var a = tape.constant(Matrix<float>::from_rows({{1, 2}}));
  const Var b = tape.constant(Matrix<float>::from_rows({{3, 4, 5}}));
  const Var parts[] = {a, b};
  EXPECT_EQ(tape.value(tape.concat_cols(parts)), Matrix<float>::from_rows({{1, 2, 3, 4, 5}}));
}

TEST(Reduce, EmptyInputsAreRejected) {
  Tape<float> tape;
  EXPECT_THROW(tape.concat_cols({}), EmptyInputError);
  EXPECT_THROW(tape.concat_rows({}), EmptyInputError);
  EXPECT_THROW(tape.mean_rows(tape.constant(Matrix<float>(0, 3))), EmptyInputError);
  EXPECT_THROW(tape.softmax_rows(tape.constant(Matrix<float>(2, 0))), EmptyInputError);
}

TEST(Reduce, SoftmaxRowsSumToOneAndAreNonnegative) {
  Rng rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng.below(5);
    const std::size_t cols = 1 + rng.below(9);
    Matrix<float> x(rows, cols);
    for (float& v : x.values()) v = static_cast<float>(rng.uniform(-30.0, 30.0));
    Tape<float> tape;
    const auto& s = tape.value(tape.softmax_rows(tape.constant(x)));
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0;
      for (float v : s.row(r)) {
        ASSERT_GE(v, 0.0f);
        sum += v;
      }
      ASSERT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(Reduce, StructuralOpsMatchFiniteDifferences) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = random_matrix(1, 4, rng);
    auto weighted = [w](Tape<double>& t, Var y) {
      return t.sum_all(t.mul(y, t.constant(w)));
    };
    std::vector<std::pair<const char*, testing::LossBuilder>> cases = {
        {"mean_rows", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.mean_rows(v[0])); }},
        {"sum_rows", [&](Tape<double>& t, const std::vector<Var>& v) { return weighted(t, t.sum_rows(v[0])); }},
        {"softmax_rows", [&](Tape<double>& t, const std::vector<Var>& v) {
           return weighted(t, t.mean_rows(t.mul(t.softmax_rows(v[0]), v[1])));
         }},
        {"concat_cols", [&](Tape<double>& t, const std::vector<Var>& v) {
           const Var parts[] = {t.slice_cols(v[0], 0, 1), t.slice_cols(v[1], 1, 3)};
           return weighted(t, t.mean_rows(t.concat_cols(parts)));
         }},
        {"concat_rows", [&](Tape<double>& t, const std::vector<Var>& v) {
           const Var parts[] = {t.slice_rows(v[0], 1, 2), v[1]};
           return weighted(t, t.sum_rows(t.concat_rows(parts)));
         }},
        {"gather_scatter", [&](Tape<double>& t, const std::vector<Var>& v) {
           const Var g = t.gather_rows(v[0], {2, 0, 2, 1});
           return weighted(t, t.sum_rows(t.mul(t.scatter_add_rows(g, {1, 1, 0, 2}, 3), v[1])));
         }},
        {"transpose_matmul_nt", [&](Tape<double>& t, const std::vector<Var>& v) {
           const Var p = t.matmul_nt(v[0], v[1]);                  // 3x3
           return weighted(t, t.mean_rows(t.matmul(t.transpose(p), v[0])));
         }},
        {"add_bias", [&](Tape<double>& t, const std::vector<Var>& v) {
           return weighted(t, t.mean_rows(t.add_bias(v[0], t.slice_rows(v[1], 0, 1))));
         }},
    };
    const auto a = random_matrix(3, 4, rng);
    const auto b = random_matrix(3, 4, rng);
    for (const auto& [name, build] : cases) {
      auto r = gradient_check({a, b}, build);
      ASSERT_LT(r.max_rel_error, 1e-4) << name << " " << r.worst;
    }
  }
}

TEST(Reduce, AggregateMatchesFiniteDifferences) {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    auto plan = std::make_shared<ad::RowAggregation<double>>();
    for (std::size_t out = 0; out < 3; ++out) {
      const std::size_t n = rng.below(4);
      for (std::size_t k = 0; k < n; ++k) {
        plan->index.push_back(static_cast<std::uint32_t>(rng.below(5)));
        plan->weight.push_back(rng.uniform(0.0, 1.0));
      }
      plan->offsets.push_back(static_cast<std::uint32_t>(plan->index.size()));
    }
    const auto w = random_matrix(3, 2, rng);
    auto r = gradient_check({random_matrix(5, 2, rng)},
                            [&](Tape<double>& t, const std::vector<Var>& v) {
                              return t.sum_all(t.mul(t.aggregate(v[0], plan), t.constant(w)));
                            });
    ASSERT_LT(r.max_rel_error, 1e-4) << r.worst;
  }
}

TEST(Loss, BceWithLogitsMatchesHandComputation) {
  const double ys[] = {0.9, 0.2, 0.5, 0.7};
  const double labels[] = {1, 0, 1, 0};
  Matrix<double> logits(4, 1);
  Matrix<double> lab(4, 1);
  double expected = 0;
  for (int i = 0; i < 4; ++i) {
    logits(i, 0) = std::log(ys[i] / (1 - ys[i]));
    lab(i, 0) = labels[i];
    expected += -(labels[i] * std::log(ys[i]) + (1 - labels[i]) * std::log(1 - ys[i]));
  }
  Tape<double> tape;
  EXPECT_NEAR(tape.value(tape.bce_with_logits(tape.constant(logits), lab))(0, 0), expected / 4, 1e-12);
}

TEST(Loss, BceAtHalfIsLn2AndPerfectIsZero) {
  Tape<double> tape;
  const auto zero = Matrix<double>(1, 1);
  EXPECT_NEAR(tape.value(tape.bce_with_logits(tape.constant(zero), Matrix<double>(1, 1, 1.0)))(0, 0),
              std::log(2.0), 1e-12);
  EXPECT_NEAR(tape.value(tape.bce_with_logits(tape.constant(zero), Matrix<double>(1, 1, 0.0)))(0, 0),
              std::log(2.0), 1e-12);
  EXPECT_NEAR(tape.value(tape.bce_with_logits(tape.constant(Matrix<double>(1, 1, 60.0)),
                                              Matrix<double>(1, 1, 1.0)))(0, 0),
              0.0, 1e-12);
}

TEST(Loss, BceGradientMatchesFiniteDifferences) {
  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix<double> labels(5, 1);
    for (double& v : labels.values()) v = static_cast<double>(rng.below(2));
    auto r = gradient_check({random_matrix(5, 1, rng)}, [&](Tape<double>& t, const std::vector<Var>& v) {
      return t.bce_with_logits(t.scale(v[0], 3.0), labels);
    });
    ASSERT_LT(r.max_rel_error, 1e-4) << r.worst;
  }
}

TEST(Backward, SumGivesOnes) {
  Tape<float> tape;
  const Var x = tape.leaf(Matrix<float>(2, 2, 0.3f), true);
  tape.backward(tape.sum_all(x));
  EXPECT_EQ(tape.grad(x), Matrix<float>(2, 2, 1.0f));
}

TEST(Backward, SigmoidChainRule) {
  Tape<double> tape;
  const auto xv = Matrix<double>::from_rows({{0.5}, {-1.25}});
  const Var w = tape.leaf(Matrix<double>::from_rows({{0.3, 0.8}}), true);
  const Var y = tape.sigmoid(tape.matmul(w, tape.constant(xv)));
  tape.backward(y);
  const double z = 0.3 * 0.5 + 0.8 * -1.25;
  const double s = 1 / (1 + std::exp(-z));
  EXPECT_NEAR(tape.grad(w)(0, 0), s * (1 - s) * 0.5, 1e-12);
  EXPECT_NEAR(tape.grad(w)(0, 1), s * (1 - s) * -1.25, 1e-12);
}

TEST(Backward, UntouchedTrainableLeafGetsZeroGradient) {
  Tape<float> tape;
  const Var x = tape.leaf(Matrix<float>(1, 2, 1.0f), true);
  const Var unused = tape.leaf(Matrix<float>(3, 1, 1.0f), true);
  tape.backward(tape.sum_all(x));
  EXPECT_EQ(tape.grad(unused), Matrix<float>(3, 1));
}

TEST(Backward, NonScalarLossIsRejected) {
  Tape<float> tape;
  const Var x = tape.leaf(Matrix<float>(2, 2), true);
  EXPECT_THROW(tape.backward(x), ContractError);
}

TEST(Backward, SecondBackwardIsRejected) {
  Tape<float> tape;
  const Var x = tape.leaf(Matrix<float>(2, 2), true);
  const Var loss = tape.sum_all(x);
  tape.backward(loss);
  EXPECT_THROW(tape.backward(loss), ContractError);
}

TEST(Backward, FiniteCheckNamesOperation) {
  Tape<float> tape;
  tape.set_check_finite(true);
  const Var x = tape.leaf(Matrix<float>(1, 1, 3e38f), true);
  try {
    tape.scale(x, 10.0f);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos) << e.what();
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ad::ParameterStore<double> store;
  store.add("w", Matrix<double>::from_rows({{1.0, -1.0}}));
  ad::Adam<double> opt({0.1, 0.9, 0.999, 1e-8}, store);
  opt.step(store, {Matrix<double>::from_rows({{2.0, -0.5}})});
  // With bias correction the first update is lr * sign(g).
  EXPECT_NEAR(store["w"](0, 0), 0.9, 1e-6);
  EXPECT_NEAR(store["w"](0, 1), -0.9, 1e-6);
}

TEST(Adam, MinimizesQuadratic) {
  ad::ParameterStore<double> store;
  store.add("x", Matrix<double>::from_rows({{3.0, -2.0}}));
  ad::Adam<double> opt({0.05, 0.9, 0.999, 1e-8}, store);
  for (int i = 0; i < 2000; ++i) {
    Tape<double> tape;
    ad::BoundParameters<double> p(tape, store);
    const Var x = p[0];
    tape.backward(tape.sum_all(tape.mul(x, x)));
    opt.step(store, p.gradients(tape));
  }
  EXPECT_NEAR(store["x"](0, 0), 0.0, 1e-2);
  EXPECT_NEAR(store["x"](0, 1), 0.0, 1e-2);
}

TEST(Parameters, DuplicateNamesRejected) {
  ad::ParameterStore<float> store;
  store.add("a", Matrix<float>(1, 1));
  EXPECT_THROW(store.add("a", Matrix<float>(1, 1)), ContractError);
}

}  // namespace
}  // namespace whinpjf
