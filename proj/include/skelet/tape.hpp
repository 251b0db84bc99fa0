#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "skelet/tensor.hpp"

namespace skelet {

/// Learnable tensor together with its accumulated gradient.
struct Parameter {
  Tensor value;
  Tensor grad;
  bool requires_grad = true;

  Parameter() = default;
  explicit Parameter(Tensor v) : value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

  void zero_grad() { grad.flat().setZero(); }
  Index size() const { return value.size(); }
};

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,
  kContractJoints,
  kScaleJoints,
  kPointwise,
  kAffine,
  kAddBias,
  kTemporalConv,
  kRelu,
  kAdd,
  kSliceChannels,
  kSliceRows,
  kConcatChannels,
  kStrideFrames,
  kMeanPool,
  kSoftmaxCrossEntropy,
  kWeightedSum,
  kSumSquares,
  kAddJointEncoding,
  kConcatInstances,
  kMaxInstances,
  kReshape,
};

std::string_view op_name(OpKind kind);

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// One recorded operation: what it was, what it consumed, and how to
/// recompute or differentiate it. Closures capture whatever intermediates
/// the backward rule needs.
struct OpRecord {
  using Forward = std::function<Tensor(const Tape&)>;
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  OpKind kind = OpKind::kConstant;
  std::vector<std::size_t> inputs;
  Tensor value;
  Tensor grad;
  Forward forward;
  Backward backward;
  Parameter* parameter = nullptr;
};

/// Linear record of a forward pass. backward() walks it in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Parameter& p);
  Var record(OpKind kind, std::vector<std::size_t> inputs, OpRecord::Forward forward,
             OpRecord::Backward backward);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  const Tensor& value(Var v) const { return value(v.id); }

  /// Gradient of the last backward root w.r.t. this node; empty when the
  /// node did not contribute.
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }

  const OpRecord& node(Var v) const { return nodes_.at(v.id); }
  std::size_t size() const { return nodes_.size(); }

  /// Re-run a node's forward rule on its recorded inputs.
  Tensor replay(Var v) const;

  /// Seeds d(root)/d(root) = 1 and accumulates into every reachable
  /// Parameter::grad. The root must hold exactly one element.
  void backward(Var root);

  void accumulate(std::size_t id, const Tensor& g);
  Tensor& grad_buffer(std::size_t id);

 private:
  std::vector<OpRecord> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(id); }

/// Running multiply-accumulate totals. Elementwise work (activations,
/// bias adds, pooling, residual adds) is kept apart in aux.
struct MacTally {
  std::uint64_t macs = 0;
  std::uint64_t aux = 0;
};

/// Installs a tally for the current thread; forward ops report into it.
class ScopedMacCounter {
 public:
  ScopedMacCounter();
  ~ScopedMacCounter();
  ScopedMacCounter(const ScopedMacCounter&) = delete;
  ScopedMacCounter& operator=(const ScopedMacCounter&) = delete;

  const MacTally& tally() const { return tally_; }

 private:
  MacTally tally_;
  MacTally* previous_;
};

void count_macs(std::uint64_t n);
void count_aux(std::uint64_t n);

}  // namespace skelet
