#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "op_cases.hpp"
#include "oracles.hpp"
#include "skelet/gradcheck.hpp"
#include "skelet/ops.hpp"

using namespace skelet;
using opcheck::check_op;
using opcheck::rand_param;

namespace {

Tensor mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Tensor t({r, c});
  Index i = 0;
  for (const auto& row : rows)
    for (double v : row) t.flat()[i++] = v;
  return t;
}

}  // namespace

TEST(Tensor, RejectsNonPositiveExtents) {
  EXPECT_THROW(Tensor({2, 0}), DimensionError);
  EXPECT_THROW(Tensor({-1}), DimensionError);
}

TEST(Tensor, RowMajorIndexingAndBoundsChecks) {
  Tensor t({2, 3});
  t(1, 2) = 5.0;
  EXPECT_EQ(t.flat()[5], 5.0);
  EXPECT_THROW(t(2, 0), IndexError);
  EXPECT_THROW(t(0), IndexError);
}

TEST(Tensor, ReshapeKeepsDataAndChecksSize) {
  Tensor t = Tensor::filled({2, 3}, 1.5);
  EXPECT_EQ(t.reshaped({3, 2}).flat(), t.flat());
  EXPECT_THROW(t.reshaped({4, 2}), DimensionError);
}

TEST(Parameter, GradIsZeroAfterReset) {
  Parameter p(Tensor::filled({3}, 2.0));
  p.grad.flat().setConstant(4.0);
  p.zero_grad();
  EXPECT_EQ(p.grad.shape(), p.value.shape());
  EXPECT_TRUE((p.grad.flat().array() == 0.0).all());
}

TEST(MatMul, IdentityLeavesMatrixUnchangedBitExactly) {
  std::mt19937_64 rng(1);
  Tape tape;
  Tensor b = oracle::random_tensor({3, 4}, rng);
  Var out = matmul(tape.constant(Tensor::from_matrix(RowMatrix<double>::Identity(3, 3))), tape.constant(b));
  EXPECT_EQ(out.value(), b);
}

TEST(MatMul, HandArithmetic) {
  Tape tape;
  Var out = matmul(tape.constant(mat({{1, 2}, {3, 4}})), tape.constant(mat({{0}, {1}})));
  EXPECT_EQ(out.value(), mat({{2}, {4}}));
}

TEST(MatMul, ShapeMismatchNamesBothShapes) {
  Tape tape;
  try {
    matmul(tape.constant(Tensor({2, 3})), tape.constant(Tensor({2, 3})));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2x3)"), std::string::npos) << msg;
  }
}

TEST(MatMul, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::vector<Parameter> in{rand_param({5, 4}, rng), rand_param({4, 3}, rng)};
  auto r = check_op([](Tape&, std::vector<Var>& v) { return matmul(v[0], v[1]); }, in, 3);
  EXPECT_LT(r.max_rel_error, 1e-6);
  EXPECT_EQ(r.coordinates, 32u);
}

TEST(TemporalConv, IdentityKernelLeavesInputUnchanged) {
  std::mt19937_64 rng(4);
  Tensor x = oracle::random_tensor({3, 7, 2}, rng);
  Tensor w({1, 2, 2});
  w(0, 0, 0) = 1.0;
  w(0, 1, 1) = 1.0;
  Tape tape;
  EXPECT_EQ(temporal_conv(tape.constant(x), tape.constant(w), 1).value(), x);
}

TEST(TemporalConv, ConstantInputAveragingKernelStrideTwo) {
  Tensor x = Tensor::filled({2, 8, 1}, 3.0);
  Tensor w = Tensor::filled({3, 1, 1}, 1.0 / 3.0);
  Tape tape;
  Tensor out = temporal_conv(tape.constant(x), tape.constant(w), 2).value();
  ASSERT_EQ(out.shape(), (Shape{2, 4, 1}));
  // Interior outputs see three taps of 3; the first output overlaps the
  // zero padding by one tap.
  for (Index j = 0; j < 2; ++j) {
    EXPECT_NEAR(out(j, 0, 0), 2.0, 1e-15);
    for (Index t = 1; t < 4; ++t) EXPECT_NEAR(out(j, t, 0), 3.0, 1e-15);
  }
}

TEST(TemporalConv, OutputLengthIsCeilOfHalf) {
  Tape tape;
  Var x = tape.constant(Tensor({1, 7, 1}));
  EXPECT_EQ(temporal_conv(x, tape.constant(Tensor({3, 1, 1})), 2).value().dim(1), 4);
  EXPECT_EQ(temporal_conv(x, tape.constant(Tensor({3, 1, 1})), 1).value().dim(1), 7);
}

TEST(TemporalConv, MatchesLoopOracle) {
  std::mt19937_64 rng(5);
  for (Index stride : {1, 2}) {
    for (Index taps : {1, 3, 5, 9}) {
      Tensor x = oracle::random_tensor({4, 11, 3}, rng);
      Tensor w = oracle::random_tensor({taps, 3, 2}, rng);
      Tape tape;
      Tensor got = temporal_conv(tape.constant(x), tape.constant(w), stride).value();
      Tensor want = oracle::temporal_conv(x, w, stride);
      ASSERT_EQ(got.shape(), want.shape());
      EXPECT_LT((got.flat() - want.flat()).cwiseAbs().maxCoeff(), 1e-13) << "k=" << taps << " s=" << stride;
    }
  }
}

TEST(TemporalConv, EvenKernelOrBadStrideIsConfigError) {
  Tape tape;
  Var x = tape.constant(Tensor({2, 4, 1}));
  EXPECT_THROW(temporal_conv(x, tape.constant(Tensor({2, 1, 1})), 1), ConfigError);
  EXPECT_THROW(temporal_conv(x, tape.constant(Tensor({3, 1, 1})), 3), ConfigError);
}

TEST(TemporalConv, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (Index stride : {1, 2}) {
    std::vector<Parameter> in{rand_param({3, 8, 2}, rng), rand_param({5, 2, 2}, rng)};
    auto r = check_op([stride](Tape&, std::vector<Var>& v) { return temporal_conv(v[0], v[1], stride); }, in, 7);
    EXPECT_LT(r.max_rel_error, 1e-5) << "stride " << stride;
  }
}

TEST(Relu, Definition) {
  Tape tape;
  Tensor x({2});
  x.flat() << -1.0, 2.0;
  Tensor y = relu(tape.constant(x)).value();
  EXPECT_EQ(y.flat()[0], 0.0);
  EXPECT_EQ(y.flat()[1], 2.0);
}

TEST(SoftmaxCrossEntropy, UniformLogitsGiveLogOfClassCount) {
  Tape tape;
  for (Index label = 0; label < 4; ++label) {
    Var loss = softmax_cross_entropy(tape.constant(Tensor::filled({1, 4}, 0.7)), label);
    EXPECT_NEAR(loss.value().flat()[0], std::log(4.0), 1e-15);
  }
}

TEST(SoftmaxCrossEntropy, LabelOutOfRangeIsIndexError) {
  Tape tape;
  Var logits = tape.constant(Tensor({1, 4}));
  EXPECT_THROW(softmax_cross_entropy(logits, 4), IndexError);
  EXPECT_THROW(softmax_cross_entropy(logits, -1), IndexError);
}

TEST(SoftmaxCrossEntropy, StableForLargeLogits) {
  Tape tape;
  Tensor logits({1, 3});
  logits.flat() << 1000.0, 0.0, -1000.0;
  EXPECT_NEAR(softmax_cross_entropy(tape.constant(logits), 0).value().flat()[0], 0.0, 1e-12);
  EXPECT_NEAR(softmax_cross_entropy(tape.constant(logits), 1).value().flat()[0], 1000.0, 1e-9);
}

TEST(Add, BroadcastsLeadingInstanceAxis) {
  std::mt19937_64 rng(8);
  Tensor a = oracle::random_tensor({1, 2, 3, 2}, rng);
  Tensor b = oracle::random_tensor({4, 2, 3, 2}, rng);
  Tape tape;
  Tensor out = add(tape.constant(a), tape.constant(b)).value();
  ASSERT_EQ(out.shape(), b.shape());
  for (Index i = 0; i < 4; ++i)
    for (Index r = 0; r < 12; ++r) EXPECT_EQ(out.flat()[i * 12 + r], a.flat()[r] + b.flat()[i * 12 + r]);
}

TEST(Add, BroadcastBackwardSumsOverInstances) {
  std::mt19937_64 rng(9);
  std::vector<Parameter> in{rand_param({1, 2, 3, 2}, rng), rand_param({4, 2, 3, 2}, rng)};
  auto r = check_op([](Tape&, std::vector<Var>& v) { return add(v[0], v[1]); }, in, 10);
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(Add, IncompatibleShapesAreRejected) {
  Tape tape;
  EXPECT_THROW(add(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 3}))), DimensionError);
}

TEST(Ops, EveryDifferentiableOpPassesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const auto cases = opcheck::differentiable_ops();
  std::uint64_t seed = 100;
  for (const auto& c : cases) {
    std::vector<Parameter> in;
    for (const auto& s : c.shapes) in.push_back(rand_param(s, rng));
    auto r = check_op(c.op, in, seed++);
    EXPECT_LT(r.max_rel_error, 1e-4) << c.name;
    EXPECT_GT(r.coordinates, 0u) << c.name;
  }
}

TEST(MaxInstances, TiesRouteGradientToLowestInstance) {
  Parameter z(Tensor::filled({3, 1, 1, 1}, 2.0));
  Tape tape;
  Var out = max_instances(tape.parameter(z));
  tape.backward(sum_squares(out));
  EXPECT_EQ(z.grad.flat()[0], 4.0);
  EXPECT_EQ(z.grad.flat()[1], 0.0);
  EXPECT_EQ(z.grad.flat()[2], 0.0);
}

TEST(GradCheck, QuadraticIsExact) {
  std::mt19937_64 rng(12);
  Parameter w = rand_param({7}, rng);
  std::vector<Parameter*> ptrs{&w};
  auto r = check_gradients([&](Tape& tape) { return sum_squares(tape.parameter(w)); }, ptrs);
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.coordinates, 7u);
}

TEST(GradCheck, NonFiniteObjectiveIsNumericError) {
  Parameter w(Tensor::filled({2}, std::numeric_limits<double>::infinity()));
  std::vector<Parameter*> ptrs{&w};
  EXPECT_THROW(check_gradients([&](Tape& tape) { return sum_squares(tape.parameter(w)); }, ptrs), NumericError);
}

TEST(GradCheck, DetectsAWrongGradient) {
  // relu at a kink: the one-sided analytic derivative differs from the
  // symmetric difference, which the harness must report.
  Parameter w(Tensor::zeros({1}));
  std::vector<Parameter*> ptrs{&w};
  auto r = check_gradients([&](Tape& tape) { return weighted_sum(relu(tape.parameter(w)), Tensor::filled({1}, 1.0)); },
                           ptrs);
  EXPECT_NEAR(r.max_rel_error, 0.5, 1e-9);
}

TEST(Tape, ReplayReproducesEveryNodeBitExactly) {
  std::mt19937_64 rng(13);
  Parameter w = rand_param({3, 4}, rng);
  Parameter k = rand_param({3, 4, 4}, rng);
  Tape tape;
  Var x = tape.constant(oracle::random_tensor({5, 6, 3}, rng));
  Var h = relu(pointwise(x, tape.parameter(w)));
  Var t = temporal_conv(h, tape.parameter(k), 2);
  Var out = mean_pool(add(t, stride_frames(h, 2)));
  for (Var v : {h, t, out}) EXPECT_EQ(tape.replay(v), v.value());
}

TEST(Tape, BackwardRequiresScalarRoot) {
  Tape tape;
  Var x = tape.constant(Tensor({2, 2}));
  EXPECT_THROW(tape.backward(x), DimensionError);
}

TEST(Tape, ForwardIsDeterministic) {
  std::mt19937_64 rng(14);
  Tensor x = oracle::random_tensor({4, 6, 3}, rng);
  Tensor w = oracle::random_tensor({5, 3, 3}, rng);
  Tape a, b;
  EXPECT_EQ(temporal_conv(a.constant(x), a.constant(w), 1).value(),
            temporal_conv(b.constant(x), b.constant(w), 1).value());
}

TEST(MacCounter, CountsForwardWorkOnly) {
  std::mt19937_64 rng(15);
  Parameter w = rand_param({3, 5}, rng);
  Tape tape;
  ScopedMacCounter counter;
  Var y = pointwise(tape.constant(oracle::random_tensor({4, 6, 3}, rng)), tape.parameter(w));
  const auto forward_macs = counter.tally().macs;
  EXPECT_EQ(forward_macs, 4u * 6u * 3u * 5u);
  tape.backward(sum_squares(y));
  EXPECT_EQ(counter.tally().macs, forward_macs);
}
