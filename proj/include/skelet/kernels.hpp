#pragma once

// Dense forward/backward kernels shared by the tape ops and the value-level
// helpers. All tensors are row-major; a (J, T, C) sequence is viewed either
// as a J x (T*C) matrix (joint contractions) or a (J*T) x C matrix (channel
// maps).

#include "skelet/tensor.hpp"

namespace skelet::kernels {

template <typename Scalar>
using StridedRows = Eigen::Map<const RowMatrix<Scalar>, 0, Eigen::OuterStride<>>;
template <typename Scalar>
using MutableStridedRows = Eigen::Map<RowMatrix<Scalar>, 0, Eigen::OuterStride<>>;

/// out[k, ...] = sum_j map[j, k] * x[j, ...]
template <typename Scalar>
BasicTensor<Scalar> contract_joints(const BasicTensor<Scalar>& map, const BasicTensor<Scalar>& x) {
  if (map.rank() != 2 || x.rank() < 1 || map.dim(0) != x.dim(0)) {
    throw DimensionError("contract_joints: map " + shape_string(map.shape()) +
                         " incompatible with input " + shape_string(x.shape()));
  }
  Shape out_shape = x.shape();
  out_shape[0] = map.dim(1);
  BasicTensor<Scalar> out(out_shape);
  const Index rest = x.size() / x.dim(0);
  out.as_matrix(map.dim(1), rest).noalias() =
      map.as_matrix(map.dim(0), map.dim(1)).transpose() * x.as_matrix(x.dim(0), rest);
  return out;
}

/// out[j, ...] = diag[j] * x[j, ...]
template <typename Scalar>
BasicTensor<Scalar> scale_joints(const BasicTensor<Scalar>& diag, const BasicTensor<Scalar>& x) {
  if (diag.rank() != 1 || diag.dim(0) != x.dim(0)) {
    throw DimensionError("scale_joints: diagonal " + shape_string(diag.shape()) +
                         " incompatible with input " + shape_string(x.shape()));
  }
  BasicTensor<Scalar> out(x.shape());
  out.leading_view().noalias() = diag.flat().asDiagonal() * x.leading_view();
  return out;
}

/// Channel map on the trailing axis: (..., Cin) x (Cin, Cout) -> (..., Cout).
template <typename Scalar>
BasicTensor<Scalar> pointwise(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& w) {
  if (w.rank() != 2 || x.shape().back() != w.dim(0)) {
    throw DimensionError("pointwise: input " + shape_string(x.shape()) + " incompatible with weight " +
                         shape_string(w.shape()));
  }
  Shape out_shape = x.shape();
  out_shape.back() = w.dim(1);
  BasicTensor<Scalar> out(out_shape);
  out.trailing_view().noalias() = x.trailing_view() * w.as_matrix(w.dim(0), w.dim(1));
  return out;
}

inline Index strided_length(Index frames, Index stride) { return (frames + stride - 1) / stride; }

/// Valid output-frame range [first, last) for one kernel tap.
inline std::pair<Index, Index> tap_range(Index tap, Index pad, Index stride, Index frames,
                                         Index out_frames) {
  // input frame = t_out * stride + tap - pad must lie in [0, frames)
  const Index shift = tap - pad;
  Index first = shift >= 0 ? 0 : (-shift + stride - 1) / stride;
  Index last = frames - 1 - shift < 0 ? 0 : (frames - 1 - shift) / stride + 1;
  last = std::min(last, out_frames);
  return {first, std::max(first, last)};
}

/// Per-joint 1-D convolution along frames with centered zero padding.
/// x: (J, T, Cin); w: (k, Cin, Cout); returns (J, ceil(T/stride), Cout).
template <typename Scalar>
BasicTensor<Scalar> temporal_conv(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& w,
                                  Index stride) {
  const Index joints = x.dim(0), frames = x.dim(1), cin = x.dim(2);
  const Index taps = w.dim(0), cout = w.dim(2);
  const Index out_frames = strided_length(frames, stride);
  const Index pad = taps / 2;
  BasicTensor<Scalar> out({joints, out_frames, cout});
  for (Index tap = 0; tap < taps; ++tap) {
    auto [first, last] = tap_range(tap, pad, stride, frames, out_frames);
    const Index n = last - first;
    if (n <= 0) continue;
    Eigen::Map<const RowMatrix<Scalar>> wk(w.data() + tap * cin * cout, cin, cout);
    for (Index j = 0; j < joints; ++j) {
      const Scalar* src = x.data() + (j * frames + first * stride + tap - pad) * cin;
      StridedRows<Scalar> rows(src, n, cin, Eigen::OuterStride<>(stride * cin));
      Eigen::Map<RowMatrix<Scalar>> dst(out.data() + (j * out_frames + first) * cout, n, cout);
      dst.noalias() += rows * wk;
    }
  }
  return out;
}

/// Accumulates gradients of temporal_conv into dx and dw.
template <typename Scalar>
void temporal_conv_backward(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& w,
                            Index stride, const BasicTensor<Scalar>& dout,
                            BasicTensor<Scalar>* dx, BasicTensor<Scalar>* dw) {
  const Index joints = x.dim(0), frames = x.dim(1), cin = x.dim(2);
  const Index taps = w.dim(0), cout = w.dim(2);
  const Index out_frames = dout.dim(1);
  const Index pad = taps / 2;
  for (Index tap = 0; tap < taps; ++tap) {
    auto [first, last] = tap_range(tap, pad, stride, frames, out_frames);
    const Index n = last - first;
    if (n <= 0) continue;
    Eigen::Map<const RowMatrix<Scalar>> wk(w.data() + tap * cin * cout, cin, cout);
    for (Index j = 0; j < joints; ++j) {
      const Index src_off = (j * frames + first * stride + tap - pad) * cin;
      Eigen::Map<const RowMatrix<Scalar>> g(dout.data() + (j * out_frames + first) * cout, n, cout);
      if (dx != nullptr) {
        MutableStridedRows<Scalar> rows(dx->data() + src_off, n, cin, Eigen::OuterStride<>(stride * cin));
        rows.noalias() += g * wk.transpose();
      }
      if (dw != nullptr) {
        StridedRows<Scalar> rows(x.data() + src_off, n, cin, Eigen::OuterStride<>(stride * cin));
        Eigen::Map<RowMatrix<Scalar>> dwk(dw->data() + tap * cin * cout, cin, cout);
        dwk.noalias() += rows.transpose() * g;
      }
    }
  }
}

/// Keeps frames 0, stride, 2*stride, ... of a (J, T, C) tensor.
template <typename Scalar>
BasicTensor<Scalar> stride_frames(const BasicTensor<Scalar>& x, Index stride) {
  const Index joints = x.dim(0), frames = x.dim(1), channels = x.dim(2);
  const Index out_frames = strided_length(frames, stride);
  BasicTensor<Scalar> out({joints, out_frames, channels});
  for (Index j = 0; j < joints; ++j) {
    for (Index t = 0; t < out_frames; ++t) {
      out.flat().segment((j * out_frames + t) * channels, channels) =
          x.flat().segment((j * frames + t * stride) * channels, channels);
    }
  }
  return out;
}

}  // namespace skelet::kernels
