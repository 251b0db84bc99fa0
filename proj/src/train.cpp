#include "skelet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace skelet {

void TrainConfig::validate() const {
  if (learning_rate < 0.0 || momentum < 0.0 || momentum >= 1.0 || weight_decay < 0.0) {
    throw ConfigError("learning rate and weight decay must be non-negative and momentum in [0, 1)");
  }
  if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch size must be positive");
}

double cosine_learning_rate(double base, int step, int total_steps) {
  if (total_steps <= 0) return base;
  const double progress = static_cast<double>(std::clamp(step, 0, total_steps)) / total_steps;
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

SgdOptimizer::SgdOptimizer(std::vector<Parameter*> params, double momentum, bool nesterov,
                           double weight_decay)
    : params_(std::move(params)), momentum_(momentum), nesterov_(nesterov), weight_decay_(weight_decay) {
  for (Parameter* p : params_) velocity_.push_back(Eigen::VectorXd::Zero(p->size()));
}

void SgdOptimizer::zero_grad() {
  for (Parameter* p : params_) p->grad = Tensor::zeros(p->value.shape());
}

void SgdOptimizer::step(double learning_rate) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (!p.requires_grad) continue;
    Eigen::VectorXd g = p.grad.flat() + weight_decay_ * p.value.flat();
    velocity_[i] = momentum_ * velocity_[i] + g;
    if (nesterov_) {
      p.value.flat() -= learning_rate * (g + momentum_ * velocity_[i]);
    } else {
      p.value.flat() -= learning_rate * velocity_[i];
    }
  }
}

namespace {

Index arg_max(const Tensor& logits) {
  Index best = 0;
  logits.flat().maxCoeff(&best);
  return best;
}

}  // namespace

TrainLog train(Network& net, std::span<const LabeledSample> dataset, const TrainConfig& tc) {
  tc.validate();
  if (dataset.empty()) throw InsufficientDataError("training needs at least one sample");
  for (const auto& s : dataset) {
    if (s.label < 0 || s.label >= net.config.num_classes) {
      throw IndexError("label " + std::to_string(s.label) + " outside [0, " +
                       std::to_string(net.config.num_classes) + ")");
    }
  }

  std::vector<Parameter*> params = net.parameters();
  SgdOptimizer optimizer(params, tc.momentum, tc.nesterov, tc.weight_decay);
  std::mt19937_64 rng(tc.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainLog log;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    std::vector<Tensor> snapshot;
    for (Parameter* p : params) snapshot.push_back(p->value);

    const double lr = tc.cosine ? cosine_learning_rate(tc.learning_rate, epoch, tc.epochs) : tc.learning_rate;
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    bool finite = true;
    for (std::size_t start = 0; start < order.size() && finite; start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      optimizer.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const LabeledSample& sample = dataset[order[i]];
        Tape tape;
        Var logits = forward(net, tape.constant(sample.input));
        Var loss = softmax_cross_entropy(logits, sample.label);
        const double value = tape.value(loss).flat()[0];
        if (!std::isfinite(value)) {
          finite = false;
          break;
        }
        loss_sum += value;
        if (arg_max(tape.value(logits)) == sample.label) ++correct;
        tape.backward(loss);
      }
      if (!finite) break;
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (Parameter* p : params) p->grad.flat() *= scale;
      optimizer.step(lr);
    }

    if (!finite) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snapshot[i];
      log.diverged = true;
      break;
    }
    const double n = static_cast<double>(dataset.size());
    log.epochs.push_back({epoch, lr, loss_sum / n, static_cast<double>(correct) / n});
  }
  return log;
}

double evaluate_accuracy(Network& net, std::span<const LabeledSample> dataset) {
  if (dataset.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : dataset) {
    if (arg_max(infer(net, s.input)) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

std::vector<Index> uniform_sample_indices(Index frames, Index target_frames, std::mt19937_64& rng) {
  if (frames < 1 || target_frames < 1) throw ConfigError("uniform sampling needs positive frame counts");
  std::vector<Index> idx(static_cast<std::size_t>(target_frames));
  if (frames >= target_frames) {
    for (Index i = 0; i < target_frames; ++i) {
      const Index lo = i * frames / target_frames;
      const Index hi = (i + 1) * frames / target_frames;  // exclusive, hi > lo
      std::uniform_int_distribution<Index> pick(lo, hi - 1);
      idx[static_cast<std::size_t>(i)] = pick(rng);
    }
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double span = static_cast<double>(frames) / static_cast<double>(target_frames);
    for (Index i = 0; i < target_frames; ++i) {
      const auto f = static_cast<Index>(std::floor((static_cast<double>(i) + unit(rng)) * span));
      idx[static_cast<std::size_t>(i)] = std::min(f, frames - 1);
    }
  }
  return idx;
}

SkeletonSequence uniform_sample(const SkeletonSequence& seq, Index target_frames, std::mt19937_64& rng) {
  const std::vector<Index> idx = uniform_sample_indices(seq.frames(), target_frames, rng);
  const Index persons = seq.persons(), joints = seq.joints(), channels = seq.channels();
  Tensor out({persons, joints, target_frames, channels});
  for (Index i = 0; i < persons; ++i) {
    for (Index j = 0; j < joints; ++j) {
      for (Index t = 0; t < target_frames; ++t) {
        const Index src = ((i * joints + j) * seq.frames() + idx[static_cast<std::size_t>(t)]) * channels;
        const Index dst = ((i * joints + j) * target_frames + t) * channels;
        out.flat().segment(dst, channels) = seq.data.flat().segment(src, channels);
      }
    }
  }
  return SkeletonSequence(std::move(out), seq.layout_id, seq.label);
}

std::vector<LabeledSample> synthetic_motion_dataset(Index joints, Index frames, Index classes, Index count,
                                                    std::uint64_t seed) {
  if (joints < 1 || frames < 1 || classes < 1 || count < 1) {
    throw ConfigError("synthetic dataset extents must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<LabeledSample> out;
  for (Index n = 0; n < count; ++n) {
    const Index label = n % classes;
    const Index axis = label % 2;
    const double cycles = 1.0 + 2.0 * static_cast<double>(label / 2);
    const double amplitude = 0.8 + 0.2 * unit(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    Tensor x({joints, frames, 3});
    for (Index j = 0; j < joints; ++j) {
      const double base_x = 0.05 * unit(rng);
      const double base_y = 0.05 * unit(rng);
      const double lag = 0.2 * static_cast<double>(j) / static_cast<double>(joints);
      for (Index t = 0; t < frames; ++t) {
        const double angle =
            2.0 * std::numbers::pi * cycles * static_cast<double>(t) / static_cast<double>(frames) + phase + lag;
        const double wave = amplitude * std::sin(angle);
        x(j, t, 0) = base_x + (axis == 0 ? wave : 0.0) + noise(rng);
        x(j, t, 1) = base_y + (axis == 1 ? wave : 0.0) + noise(rng);
        x(j, t, 2) = 1.0;
      }
    }
    out.push_back({std::move(x), label});
  }
  return out;
}

}  // namespace skelet
