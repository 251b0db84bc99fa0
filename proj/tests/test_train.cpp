#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "skelet/train.hpp"

using namespace skelet;

namespace {

Network toy(std::uint64_t seed) {
  const std::vector<PartitionMap> parts{contiguous_partition(6, 2)};
  return build_network(toy_network_config(6, 8, 2), chain_layout(6), parts, true, seed);
}

std::vector<Tensor> snapshot(Network& net) {
  std::vector<Tensor> out;
  for (Parameter* p : net.parameters()) out.push_back(p->value);
  return out;
}

}  // namespace

TEST(Cosine, EndpointsAndMidpoint) {
  EXPECT_EQ(cosine_learning_rate(0.1, 0, 120), 0.1);
  EXPECT_NEAR(cosine_learning_rate(0.1, 60, 120), 0.05, 1e-15);
  EXPECT_NEAR(cosine_learning_rate(0.1, 120, 120), 0.0, 1e-15);
  EXPECT_NEAR(cosine_learning_rate(0.2, 30, 120), 0.1 * (1.0 + std::cos(std::numbers::pi / 4.0)), 1e-15);
}

TEST(Cosine, NonIncreasing) {
  double prev = cosine_learning_rate(1.0, 0, 50);
  for (int t = 1; t <= 50; ++t) {
    const double now = cosine_learning_rate(1.0, t, 50);
    EXPECT_LE(now, prev);
    prev = now;
  }
}

TEST(Sgd, NesterovStepsFollowHandRecurrence) {
  Parameter p(Tensor::filled({1}, 1.0));
  SgdOptimizer opt({&p}, 0.9, true, 0.01);
  double value = 1.0, velocity = 0.0;
  for (double grad : {0.5, -0.25, 2.0}) {
    p.grad = Tensor::filled({1}, grad);
    opt.step(0.1);
    const double g = grad + 0.01 * value;
    velocity = 0.9 * velocity + g;
    value -= 0.1 * (g + 0.9 * velocity);
    EXPECT_NEAR(p.value(0), value, 1e-15);
  }
}

TEST(Sgd, PlainMomentumStepsFollowHandRecurrence) {
  Parameter p(Tensor::filled({1}, -2.0));
  SgdOptimizer opt({&p}, 0.5, false, 0.0);
  double value = -2.0, velocity = 0.0;
  for (double grad : {1.0, 1.0, -3.0}) {
    p.grad = Tensor::filled({1}, grad);
    opt.step(0.2);
    velocity = 0.5 * velocity + grad;
    value -= 0.2 * velocity;
    EXPECT_NEAR(p.value(0), value, 1e-15);
  }
}

TEST(Train, ZeroLearningRateLeavesParametersBitIdentical) {
  Network net = toy(3);
  const auto before = snapshot(net);
  const auto data = synthetic_motion_dataset(6, 8, 2, 8, 5);
  TrainConfig tc;
  tc.learning_rate = 0.0;
  tc.weight_decay = 0.0;
  tc.epochs = 2;
  tc.batch_size = 4;
  const TrainLog log = train(net, data, tc);
  EXPECT_EQ(log.epochs.size(), 2u);
  const auto after = snapshot(net);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i], after[i]);
}

TEST(Train, SameSeedsReproduceTheRun) {
  const auto data = synthetic_motion_dataset(6, 8, 2, 8, 5);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.epochs = 3;
  tc.batch_size = 4;
  tc.seed = 12;
  Network a = toy(3), b = toy(3);
  const TrainLog la = train(a, data, tc);
  const TrainLog lb = train(b, data, tc);
  ASSERT_EQ(la.epochs.size(), lb.epochs.size());
  for (std::size_t e = 0; e < la.epochs.size(); ++e) EXPECT_EQ(la.epochs[e].loss, lb.epochs[e].loss);
  const auto sa = snapshot(a), sb = snapshot(b);
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_EQ(sa[i], sb[i]);
}

TEST(Train, NonFiniteLossRestoresEpochStartAndStops) {
  Network net = toy(4);
  auto data = synthetic_motion_dataset(6, 8, 2, 4, 6);
  data[2].input(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto before = snapshot(net);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.epochs = 5;
  tc.batch_size = 1;
  const TrainLog log = train(net, data, tc);
  EXPECT_TRUE(log.diverged);
  EXPECT_TRUE(log.epochs.empty());
  const auto after = snapshot(net);
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i], after[i]);
}

TEST(Train, RejectsBadLabelsAndEmptyData) {
  Network net = toy(1);
  auto data = synthetic_motion_dataset(6, 8, 2, 2, 6);
  data[0].label = 2;
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train(net, data, tc), IndexError);
  EXPECT_THROW(train(net, std::span<const LabeledSample>{}, tc), InsufficientDataError);
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), ConfigError);
}

TEST(UniformSample, OneFramePerEqualSpan) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 200; ++trial) {
    const auto idx = uniform_sample_indices(10, 5, rng);
    ASSERT_EQ(idx.size(), 5u);
    for (Index i = 0; i < 5; ++i) {
      EXPECT_GE(idx[static_cast<std::size_t>(i)], 2 * i);
      EXPECT_LE(idx[static_cast<std::size_t>(i)], 2 * i + 1);
    }
  }
}

TEST(UniformSample, EqualLengthIsIdentity) {
  std::mt19937_64 rng(71);
  const auto idx = uniform_sample_indices(7, 7, rng);
  for (Index i = 0; i < 7; ++i) EXPECT_EQ(idx[static_cast<std::size_t>(i)], i);
}

TEST(UniformSample, IncreasingWhenDownsamplingAndSeeded) {
  std::mt19937_64 a(72), b(72);
  for (Index frames : {37, 100, 301}) {
    const auto ia = uniform_sample_indices(frames, 20, a);
    EXPECT_EQ(ia, uniform_sample_indices(frames, 20, b));
    for (std::size_t i = 1; i < ia.size(); ++i) EXPECT_LT(ia[i - 1], ia[i]);
    EXPECT_GE(ia.front(), 0);
    EXPECT_LT(ia.back(), frames);
  }
}

TEST(UniformSample, ShortSequencesRepeatFrames) {
  std::mt19937_64 rng(73);
  const auto idx = uniform_sample_indices(3, 9, rng);
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], static_cast<Index>(i / 3));
}

TEST(UniformSample, SequenceGathersPickedFrames) {
  std::mt19937_64 data_rng(74);
  Tensor d = oracle::random_tensor({2, 3, 10, 2}, data_rng);
  const SkeletonSequence seq(d, "custom", 4);
  std::mt19937_64 a(75), b(75);
  const SkeletonSequence out = uniform_sample(seq, 5, a);
  const auto idx = uniform_sample_indices(10, 5, b);
  ASSERT_EQ(out.data.shape(), (Shape{2, 3, 5, 2}));
  EXPECT_EQ(out.label, 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index t = 0; t < 5; ++t)
        for (Index c = 0; c < 2; ++c) EXPECT_EQ(out.data(i, j, t, c), d(i, j, idx[static_cast<std::size_t>(t)], c));
}

TEST(SyntheticData, DeterministicBalancedAndConfident) {
  const auto a = synthetic_motion_dataset(5, 12, 4, 16, 9);
  const auto b = synthetic_motion_dataset(5, 12, 4, 16, 9);
  const auto c = synthetic_motion_dataset(5, 12, 4, 16, 10);
  ASSERT_EQ(a.size(), 16u);
  std::vector<int> per_class(4, 0);
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].input, b[n].input);
    EXPECT_EQ(a[n].input.shape(), (Shape{5, 12, 3}));
    ++per_class[static_cast<std::size_t>(a[n].label)];
    for (Index j = 0; j < 5; ++j)
      for (Index t = 0; t < 12; ++t) EXPECT_EQ(a[n].input(j, t, 2), 1.0);
  }
  EXPECT_EQ(per_class, (std::vector<int>{4, 4, 4, 4}));
  EXPECT_FALSE(a[0].input == c[0].input);
}
