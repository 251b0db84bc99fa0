#pragma once

// Finite-difference harness and the table of differentiable ops, shared by
// the unit tests and the acceptance binary.

#include <functional>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "skelet/gradcheck.hpp"
#include "skelet/ops.hpp"

namespace opcheck {

using namespace skelet;

using OpFn = std::function<Var(Tape&, std::vector<Var>&)>;

struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  OpFn op;
};

inline Parameter rand_param(Shape shape, std::mt19937_64& rng) {
  return Parameter(oracle::random_tensor(std::move(shape), rng));
}

// Projects an op output onto fixed random weights so every output entry
// contributes to the scalar being checked.
inline GradCheckReport check_op(const OpFn& op, std::vector<Parameter>& inputs, std::uint64_t seed) {
  std::vector<Parameter*> ptrs;
  for (auto& p : inputs) ptrs.push_back(&p);
  Tensor projection;
  {
    Tape tape;
    std::vector<Var> vars;
    for (auto& p : inputs) vars.push_back(tape.parameter(p));
    std::mt19937_64 rng(seed);
    projection = oracle::random_tensor(op(tape, vars).value().shape(), rng);
  }
  return check_gradients(
      [&](Tape& tape) {
        std::vector<Var> vars;
        for (auto& p : inputs) vars.push_back(tape.parameter(p));
        return weighted_sum(op(tape, vars), projection);
      },
      ptrs);
}

inline std::vector<OpCase> differentiable_ops() {
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](Tape&, auto& v) { return matmul(v[0], v[1]); }},
      {"contract_joints", {{4, 3}, {4, 2, 3}}, [](Tape&, auto& v) { return contract_joints(v[0], v[1]); }},
      {"scale_joints", {{4}, {4, 2, 3}}, [](Tape&, auto& v) { return scale_joints(v[0], v[1]); }},
      {"pointwise", {{3, 2, 4}, {4, 5}}, [](Tape&, auto& v) { return pointwise(v[0], v[1]); }},
      {"affine", {{3, 2, 4}, {4}, {4}}, [](Tape&, auto& v) { return affine(v[0], v[1], v[2]); }},
      {"add_bias", {{3, 2, 4}, {4}}, [](Tape&, auto& v) { return add_bias(v[0], v[1]); }},
      {"temporal_conv", {{2, 7, 3}, {3, 3, 2}}, [](Tape&, auto& v) { return temporal_conv(v[0], v[1], 1); }},
      {"temporal_conv/2", {{2, 7, 3}, {5, 3, 2}}, [](Tape&, auto& v) { return temporal_conv(v[0], v[1], 2); }},
      {"relu", {{3, 4, 2}}, [](Tape&, auto& v) { return relu(v[0]); }},
      {"add", {{3, 4, 2}, {3, 4, 2}}, [](Tape&, auto& v) { return add(v[0], v[1]); }},
      {"slice_channels", {{3, 2, 6}}, [](Tape&, auto& v) { return slice_channels(v[0], 1, 4); }},
      {"slice_rows", {{5, 2, 3}}, [](Tape&, auto& v) { return slice_rows(v[0], 1, 4); }},
      {"concat_channels", {{3, 2, 2}, {3, 2, 3}},
       [](Tape&, auto& v) { return concat_channels(std::vector<Var>{v[0], v[1]}); }},
      {"stride_frames", {{3, 5, 2}}, [](Tape&, auto& v) { return stride_frames(v[0], 2); }},
      {"mean_pool", {{3, 4, 2}}, [](Tape&, auto& v) { return mean_pool(v[0]); }},
      {"softmax_cross_entropy", {{1, 5}}, [](Tape&, auto& v) { return softmax_cross_entropy(v[0], 3); }},
      {"sum_squares", {{3, 4}}, [](Tape&, auto& v) { return sum_squares(v[0]); }},
      {"add_joint_encoding", {{2, 3, 4, 2}, {3, 2}}, [](Tape&, auto& v) { return add_joint_encoding(v[0], v[1]); }},
      {"concat_instances", {{3, 2, 2, 4}}, [](Tape&, auto& v) { return concat_instances(v[0]); }},
      {"max_instances", {{3, 2, 2, 4}}, [](Tape&, auto& v) { return max_instances(v[0]); }},
      {"reshape", {{3, 4}}, [](Tape&, auto& v) { return reshape(v[0], {2, 6}); }},
  };
}

}  // namespace opcheck
