#pragma once

#include <span>
#include <vector>

#include "skelet/tape.hpp"

namespace skelet {

/// (m x k) . (k x n)
Var matmul(Var a, Var b);

/// Contracts the joint (leading) axis: out[k, ...] = sum_j map[j, k] * x[j, ...].
Var contract_joints(Var map, Var x);

/// Per-joint scaling by a diagonal stored as a length-J vector.
Var scale_joints(Var diag, Var x);

/// Trailing-axis channel map (..., Cin) -> (..., Cout).
Var pointwise(Var x, Var weight);

/// Per-channel scale then bias on the trailing axis.
Var affine(Var x, Var scale, Var bias);

/// Per-channel bias on the trailing axis.
Var add_bias(Var x, Var bias);

/// Frame-axis convolution of a (J, T, Cin) input with a (k, Cin, Cout)
/// kernel. k must be odd; output has ceil(T / stride) frames.
Var temporal_conv(Var x, Var kernel, Index stride);

Var relu(Var x);

/// Elementwise sum. When the leading extents differ and one of them is 1,
/// that operand is broadcast along the leading axis.
Var add(Var a, Var b);

Var slice_channels(Var x, Index begin, Index end);
/// Rows [begin, end) of the leading axis.
Var slice_rows(Var x, Index begin, Index end);
Var concat_channels(std::span<const Var> parts);

/// Keeps every stride-th frame of a (J, T, C) tensor, starting at 0.
Var stride_frames(Var x, Index stride);

/// (J, T, C) -> (1, C) average over joints and frames.
Var mean_pool(Var x);

/// Scalar loss -log softmax(logits)[label].
Var softmax_cross_entropy(Var logits, Index label);

/// Scalar sum(x * weights); used to project outputs for gradient checks.
Var weighted_sum(Var x, const Tensor& weights);

Var sum_squares(Var x);

/// (I, J, T, C) + encoding (J, C) broadcast over instances and frames.
Var add_joint_encoding(Var y, Var encoding);

/// (I, J, T, C) -> (J, T, I*C): per (j, t), instance vectors laid end to end.
Var concat_instances(Var y);

/// (I, J, T, C) -> (J, T, C) elementwise max over instances. Ties route the
/// gradient to the lowest instance index.
Var max_instances(Var z);

Var reshape(Var x, Shape shape);

}  // namespace skelet
