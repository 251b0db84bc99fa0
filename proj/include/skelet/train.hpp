#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "skelet/network.hpp"
#include "skelet/sequence.hpp"

namespace skelet {

struct TrainConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  bool nesterov = true;
  double weight_decay = 0.0005;
  int epochs = 120;
  int batch_size = 16;
  bool cosine = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// eta_t = eta_0 * (1 + cos(pi * t / t_max)) / 2
double cosine_learning_rate(double base, int step, int total_steps);

/// SGD with (Nesterov) momentum and L2 weight decay folded into the gradient:
///   g' = g + wd * p;  v = mu * v + g';  p -= lr * (g' + mu * v)   (Nesterov)
///                                       p -= lr * v                (plain)
class SgdOptimizer {
 public:
  SgdOptimizer(std::vector<Parameter*> params, double momentum, bool nesterov, double weight_decay);

  void step(double learning_rate);
  void zero_grad();

 private:
  std::vector<Parameter*> params_;
  std::vector<Eigen::VectorXd> velocity_;
  double momentum_;
  bool nesterov_;
  double weight_decay_;
};

struct LabeledSample {
  Tensor input;  // (J, T, C)
  Index label = 0;
};

struct EpochLog {
  int epoch = 0;
  double learning_rate = 0.0;
  double loss = 0.0;      // mean training loss over the epoch
  double accuracy = 0.0;  // training accuracy seen during the epoch
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  bool diverged = false;
};

/// Mini-batch training with softmax cross-entropy. Gradients within a batch
/// are averaged in sample order. On a non-finite loss the parameters are
/// restored to the start of the failing epoch and training stops.
TrainLog train(Network& net, std::span<const LabeledSample> dataset, const TrainConfig& tc);

/// Fraction of samples whose arg-max logit equals the label.
double evaluate_accuracy(Network& net, std::span<const LabeledSample> dataset);

/// Splits [0, T) into `target_frames` equal spans and draws one frame from
/// each. Sequences shorter than the target repeat frames.
SkeletonSequence uniform_sample(const SkeletonSequence& seq, Index target_frames, std::mt19937_64& rng);

/// Frame indices uniform_sample would pick for a sequence of `frames`.
std::vector<Index> uniform_sample_indices(Index frames, Index target_frames, std::mt19937_64& rng);

/// Seeded toy motion dataset of `count` (J, T, 3) samples with labels
/// cycling through `classes`. Class c moves every joint along axis c % 2
/// with a sinusoid of 1 + 2 * (c / 2) cycles per clip; amplitude, phase, a
/// per-joint offset and small noise vary per sample. Confidence is 1.
std::vector<LabeledSample> synthetic_motion_dataset(Index joints, Index frames, Index classes, Index count,
                                                    std::uint64_t seed);

}  // namespace skelet
