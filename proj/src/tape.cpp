#include "skelet/tape.hpp"

namespace skelet {

namespace {
thread_local MacTally* active_tally = nullptr;
}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kContractJoints: return "contract_joints";
    case OpKind::kScaleJoints: return "scale_joints";
    case OpKind::kPointwise: return "pointwise";
    case OpKind::kAffine: return "affine";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kTemporalConv: return "temporal_conv";
    case OpKind::kRelu: return "relu";
    case OpKind::kAdd: return "add";
    case OpKind::kSliceChannels: return "slice_channels";
    case OpKind::kSliceRows: return "slice_rows";
    case OpKind::kConcatChannels: return "concat_channels";
    case OpKind::kStrideFrames: return "stride_frames";
    case OpKind::kMeanPool: return "mean_pool";
    case OpKind::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
    case OpKind::kWeightedSum: return "weighted_sum";
    case OpKind::kSumSquares: return "sum_squares";
    case OpKind::kAddJointEncoding: return "add_joint_encoding";
    case OpKind::kConcatInstances: return "concat_instances";
    case OpKind::kMaxInstances: return "max_instances";
    case OpKind::kReshape: return "reshape";
  }
  return "unknown";
}

Var Tape::constant(Tensor value) {
  OpRecord rec;
  rec.kind = OpKind::kConstant;
  rec.value = std::move(value);
  nodes_.push_back(std::move(rec));
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  OpRecord rec;
  rec.kind = OpKind::kParameter;
  rec.value = p.value;
  rec.parameter = &p;
  nodes_.push_back(std::move(rec));
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(OpKind kind, std::vector<std::size_t> inputs, OpRecord::Forward forward,
                 OpRecord::Backward backward) {
  OpRecord rec;
  rec.kind = kind;
  rec.inputs = std::move(inputs);
  rec.value = forward(*this);
  rec.forward = std::move(forward);
  rec.backward = std::move(backward);
  nodes_.push_back(std::move(rec));
  return Var{this, nodes_.size() - 1};
}

Tensor Tape::replay(Var v) const {
  const OpRecord& rec = nodes_.at(v.id);
  if (!rec.forward) return rec.value;
  return rec.forward(*this);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  OpRecord& rec = nodes_.at(id);
  if (rec.grad.empty()) rec.grad = Tensor::zeros(rec.value.shape());
  return rec.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Tensor& buf = grad_buffer(id);
  if (buf.shape() != g.shape()) {
    throw DimensionError("gradient shape " + shape_string(g.shape()) + " does not match node " +
                         shape_string(buf.shape()));
  }
  buf.flat() += g.flat();
}

void Tape::backward(Var root) {
  if (root.tape != this) throw ConfigError("backward root belongs to a different tape");
  if (value(root).size() != 1) {
    throw DimensionError("backward root must be scalar, got " + shape_string(value(root).shape()));
  }
  for (auto& rec : nodes_) rec.grad = Tensor();
  grad_buffer(root.id).flat().setOnes();

  for (std::size_t i = root.id + 1; i-- > 0;) {
    OpRecord& rec = nodes_[i];
    if (rec.grad.empty()) continue;
    if (rec.backward) {
      // Copy: the closure may grow other buffers but never this one.
      const Tensor g = rec.grad;
      rec.backward(*this, g);
    }
    if (rec.parameter != nullptr && rec.parameter->requires_grad) {
      if (rec.parameter->grad.shape() != rec.value.shape()) {
        rec.parameter->grad = Tensor::zeros(rec.value.shape());
      }
      rec.parameter->grad.flat() += rec.grad.flat();
    }
  }
}

ScopedMacCounter::ScopedMacCounter() : previous_(active_tally) { active_tally = &tally_; }

ScopedMacCounter::~ScopedMacCounter() { active_tally = previous_; }

void count_macs(std::uint64_t n) {
  if (active_tally != nullptr) active_tally->macs += n;
}

void count_aux(std::uint64_t n) {
  if (active_tally != nullptr) active_tally->aux += n;
}

}  // namespace skelet
