#include "skelet/ops.hpp"

#include <cmath>
#include <limits>

#include "skelet/kernels.hpp"

namespace skelet {

namespace {

using U64 = std::uint64_t;

U64 u64(Index v) { return static_cast<U64>(v); }

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ConfigError("operands live on different tapes");
}

std::string pair_shapes(const Tensor& a, const Tensor& b) {
  return shape_string(a.shape()) + " and " + shape_string(b.shape());
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + pair_shapes(av, bv));
  }
  count_macs(u64(av.dim(0)) * u64(av.dim(1)) * u64(bv.dim(1)));
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(
      OpKind::kMatMul, {ia, ib},
      [ia, ib](const Tape& t) {
        const Tensor& x = t.value(ia);
        const Tensor& y = t.value(ib);
        Tensor out({x.dim(0), y.dim(1)});
        out.as_matrix(x.dim(0), y.dim(1)).noalias() =
            x.as_matrix(x.dim(0), x.dim(1)) * y.as_matrix(y.dim(0), y.dim(1));
        return out;
      },
      [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(ia);
        const Tensor& y = t.value(ib);
        const auto gm = g.as_matrix(g.dim(0), g.dim(1));
        t.grad_buffer(ia).as_matrix(x.dim(0), x.dim(1)).noalias() +=
            gm * y.as_matrix(y.dim(0), y.dim(1)).transpose();
        t.grad_buffer(ib).as_matrix(y.dim(0), y.dim(1)).noalias() +=
            x.as_matrix(x.dim(0), x.dim(1)).transpose() * gm;
      });
}

Var contract_joints(Var map, Var x) {
  require_same_tape(map, x);
  const Tensor& mv = map.value();
  const Tensor& xv = x.value();
  if (mv.rank() != 2 || mv.dim(0) != xv.dim(0)) {
    throw DimensionError("contract_joints: map " + shape_string(mv.shape()) +
                         " does not match input joints of " + shape_string(xv.shape()));
  }
  const Index rest = xv.size() / xv.dim(0);
  count_macs(u64(mv.dim(0)) * u64(mv.dim(1)) * u64(rest));
  const std::size_t im = map.id, ix = x.id;
  return map.tape->record(
      OpKind::kContractJoints, {im, ix},
      [im, ix](const Tape& t) { return kernels::contract_joints(t.value(im), t.value(ix)); },
      [im, ix](Tape& t, const Tensor& g) {
        const Tensor& m = t.value(im);
        const Tensor& xs = t.value(ix);
        const Index ji = m.dim(0), jo = m.dim(1);
        const Index r = xs.size() / ji;
        const auto gm = g.as_matrix(jo, r);
        const auto mm = m.as_matrix(ji, jo);
        t.grad_buffer(ix).as_matrix(ji, r).noalias() += mm * gm;
        t.grad_buffer(im).as_matrix(ji, jo).noalias() += xs.as_matrix(ji, r) * gm.transpose();
      });
}

Var scale_joints(Var diag, Var x) {
  require_same_tape(diag, x);
  const Tensor& dv = diag.value();
  const Tensor& xv = x.value();
  if (dv.rank() != 1 || dv.dim(0) != xv.dim(0)) {
    throw DimensionError("scale_joints: diagonal " + shape_string(dv.shape()) +
                         " does not match input joints of " + shape_string(xv.shape()));
  }
  count_macs(u64(xv.size()));
  const std::size_t id = diag.id, ix = x.id;
  return diag.tape->record(
      OpKind::kScaleJoints, {id, ix},
      [id, ix](const Tape& t) { return kernels::scale_joints(t.value(id), t.value(ix)); },
      [id, ix](Tape& t, const Tensor& g) {
        const Tensor& d = t.value(id);
        const Tensor& xs = t.value(ix);
        t.grad_buffer(ix).leading_view().noalias() += d.flat().asDiagonal() * g.leading_view();
        t.grad_buffer(id).flat() += xs.leading_view().cwiseProduct(g.leading_view()).rowwise().sum();
      });
}

Var pointwise(Var x, Var weight) {
  require_same_tape(x, weight);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  if (wv.rank() != 2 || xv.shape().back() != wv.dim(0)) {
    throw DimensionError("pointwise: input " + shape_string(xv.shape()) +
                         " incompatible with weight " + shape_string(wv.shape()));
  }
  count_macs(u64(xv.size()) * u64(wv.dim(1)));
  const std::size_t ix = x.id, iw = weight.id;
  return x.tape->record(
      OpKind::kPointwise, {ix, iw},
      [ix, iw](const Tape& t) { return kernels::pointwise(t.value(ix), t.value(iw)); },
      [ix, iw](Tape& t, const Tensor& g) {
        const Tensor& xs = t.value(ix);
        const Tensor& w = t.value(iw);
        const auto wm = w.as_matrix(w.dim(0), w.dim(1));
        t.grad_buffer(ix).trailing_view().noalias() += g.trailing_view() * wm.transpose();
        t.grad_buffer(iw).as_matrix(w.dim(0), w.dim(1)).noalias() +=
            xs.trailing_view().transpose() * g.trailing_view();
      });
}

Var affine(Var x, Var scale, Var bias) {
  require_same_tape(x, scale);
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  const Index channels = xv.shape().back();
  if (scale.value().size() != channels || bias.value().size() != channels) {
    throw DimensionError("affine: scale/bias " + pair_shapes(scale.value(), bias.value()) +
                         " do not match channels of " + shape_string(xv.shape()));
  }
  count_aux(u64(xv.size()));
  const std::size_t ix = x.id, is = scale.id, ib = bias.id;
  return x.tape->record(
      OpKind::kAffine, {ix, is, ib},
      [ix, is, ib](const Tape& t) {
        const Tensor& xs = t.value(ix);
        Tensor out(xs.shape());
        out.trailing_view() =
            (xs.trailing_view() * t.value(is).flat().asDiagonal()).rowwise() +
            t.value(ib).flat().transpose();
        return out;
      },
      [ix, is, ib](Tape& t, const Tensor& g) {
        const Tensor& xs = t.value(ix);
        const auto gv = g.trailing_view();
        t.grad_buffer(ix).trailing_view().noalias() += gv * t.value(is).flat().asDiagonal();
        t.grad_buffer(is).flat() += xs.trailing_view().cwiseProduct(gv).colwise().sum().transpose();
        t.grad_buffer(ib).flat() += gv.colwise().sum().transpose();
      });
}

Var add_bias(Var x, Var bias) {
  require_same_tape(x, bias);
  const Tensor& xv = x.value();
  if (bias.value().size() != xv.shape().back()) {
    throw DimensionError("add_bias: bias " + shape_string(bias.value().shape()) +
                         " does not match channels of " + shape_string(xv.shape()));
  }
  count_aux(u64(xv.size()));
  const std::size_t ix = x.id, ib = bias.id;
  return x.tape->record(
      OpKind::kAddBias, {ix, ib},
      [ix, ib](const Tape& t) {
        const Tensor& xs = t.value(ix);
        Tensor out(xs.shape());
        out.trailing_view() = xs.trailing_view().rowwise() + t.value(ib).flat().transpose();
        return out;
      },
      [ix, ib](Tape& t, const Tensor& g) {
        t.grad_buffer(ix).flat() += g.flat();
        t.grad_buffer(ib).flat() += g.trailing_view().colwise().sum().transpose();
      });
}

Var temporal_conv(Var x, Var kernel, Index stride) {
  require_same_tape(x, kernel);
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  if (kv.rank() != 3 || kv.dim(0) % 2 == 0) {
    throw ConfigError("temporal_conv: kernel must be (k, Cin, Cout) with odd k, got " +
                      shape_string(kv.shape()));
  }
  if (stride != 1 && stride != 2) {
    throw ConfigError("temporal_conv: stride must be 1 or 2, got " + std::to_string(stride));
  }
  if (xv.rank() != 3 || xv.dim(2) != kv.dim(1)) {
    throw DimensionError("temporal_conv: input " + shape_string(xv.shape()) +
                         " incompatible with kernel " + shape_string(kv.shape()));
  }
  const Index out_frames = kernels::strided_length(xv.dim(1), stride);
  count_macs(u64(xv.dim(0)) * u64(out_frames) * u64(kv.dim(0)) * u64(kv.dim(1)) * u64(kv.dim(2)));
  const std::size_t ix = x.id, ik = kernel.id;
  return x.tape->record(
      OpKind::kTemporalConv, {ix, ik},
      [ix, ik, stride](const Tape& t) { return kernels::temporal_conv(t.value(ix), t.value(ik), stride); },
      [ix, ik, stride](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_buffer(ix);
        Tensor& dk = t.grad_buffer(ik);
        kernels::temporal_conv_backward(t.value(ix), t.value(ik), stride, g, &dx, &dk);
      });
}

Var relu(Var x) {
  count_aux(u64(x.value().size()));
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kRelu, {ix},
      [ix](const Tape& t) {
        const Tensor& xs = t.value(ix);
        return Tensor(xs.shape(), xs.flat().cwiseMax(0.0));
      },
      [ix](Tape& t, const Tensor& g) {
        const Tensor& xs = t.value(ix);
        t.grad_buffer(ix).flat().array() +=
            (xs.flat().array() > 0.0).select(g.flat().array(), 0.0);
      });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() == bv.shape()) {
    count_aux(u64(av.size()));
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->record(
        OpKind::kAdd, {ia, ib},
        [ia, ib](const Tape& t) {
          const Tensor& x = t.value(ia);
          return Tensor(x.shape(), x.flat() + t.value(ib).flat());
        },
        [ia, ib](Tape& t, const Tensor& g) {
          t.grad_buffer(ia).flat() += g.flat();
          t.grad_buffer(ib).flat() += g.flat();
        });
  }

  const bool same_tail = av.rank() == bv.rank() && av.rank() >= 1 &&
                         std::equal(av.shape().begin() + 1, av.shape().end(), bv.shape().begin() + 1);
  if (!same_tail || (av.dim(0) != 1 && bv.dim(0) != 1)) {
    throw DimensionError("add: shapes " + pair_shapes(av, bv) + " are not broadcast-compatible");
  }
  // One operand has leading extent 1; broadcast it over the other's leading axis.
  const bool a_is_small = av.dim(0) == 1;
  const std::size_t small = a_is_small ? a.id : b.id;
  const std::size_t big = a_is_small ? b.id : a.id;
  count_aux(u64(std::max(av.size(), bv.size())));
  return a.tape->record(
      OpKind::kAdd, {a.id, b.id},
      [small, big](const Tape& t) {
        const Tensor& s = t.value(small);
        const Tensor& l = t.value(big);
        Tensor out(l.shape());
        out.leading_view() = l.leading_view().rowwise() + s.flat().transpose();
        return out;
      },
      [small, big](Tape& t, const Tensor& g) {
        t.grad_buffer(big).flat() += g.flat();
        t.grad_buffer(small).flat() += g.leading_view().colwise().sum().transpose();
      });
}

Var slice_channels(Var x, Index begin, Index end) {
  const Tensor& xv = x.value();
  const Index channels = xv.shape().back();
  if (begin < 0 || end > channels || begin >= end) {
    throw IndexError("slice_channels: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + std::to_string(channels) + " channels");
  }
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kSliceChannels, {ix},
      [ix, begin, end](const Tape& t) {
        const Tensor& xs = t.value(ix);
        Shape shape = xs.shape();
        shape.back() = end - begin;
        Tensor out(shape);
        out.trailing_view() = xs.trailing_view().middleCols(begin, end - begin);
        return out;
      },
      [ix, begin, end](Tape& t, const Tensor& g) {
        t.grad_buffer(ix).trailing_view().middleCols(begin, end - begin) += g.trailing_view();
      });
}

Var slice_rows(Var x, Index begin, Index end) {
  const Tensor& xv = x.value();
  if (xv.rank() < 1 || begin < 0 || end > xv.dim(0) || begin >= end) {
    throw IndexError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) + ") outside " +
                     shape_string(xv.shape()));
  }
  const std::size_t ix = x.id;
  const Index stride = xv.size() / xv.dim(0);
  return x.tape->record(
      OpKind::kSliceRows, {ix},
      [ix, begin, end, stride](const Tape& t) {
        Shape shape = t.value(ix).shape();
        shape.front() = end - begin;
        Tensor out(shape);
        out.flat() = t.value(ix).flat().segment(begin * stride, (end - begin) * stride);
        return out;
      },
      [ix, begin, end, stride](Tape& t, const Tensor& g) {
        t.grad_buffer(ix).flat().segment(begin * stride, (end - begin) * stride) += g.flat();
      });
}

Var concat_channels(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_channels: no inputs");
  Tape* tape = parts.front().tape;
  const Shape& lead = parts.front().value().shape();
  std::vector<std::size_t> ids;
  std::vector<Index> offsets;
  Index total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts.front(), p);
    const Shape& s = p.value().shape();
    if (s.size() != lead.size() || !std::equal(s.begin(), s.end() - 1, lead.begin())) {
      throw DimensionError("concat_channels: " + shape_string(s) + " vs " + shape_string(lead));
    }
    ids.push_back(p.id);
    offsets.push_back(total);
    total += s.back();
  }
  return tape->record(
      OpKind::kConcatChannels, ids,
      [ids, offsets, total](const Tape& t) {
        Shape shape = t.value(ids.front()).shape();
        shape.back() = total;
        Tensor out(shape);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const Tensor& p = t.value(ids[i]);
          out.trailing_view().middleCols(offsets[i], p.shape().back()) = p.trailing_view();
        }
        return out;
      },
      [ids, offsets](Tape& t, const Tensor& g) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const Index width = t.value(ids[i]).shape().back();
          t.grad_buffer(ids[i]).trailing_view() += g.trailing_view().middleCols(offsets[i], width);
        }
      });
}

Var stride_frames(Var x, Index stride) {
  if (x.value().rank() != 3) {
    throw DimensionError("stride_frames: expected (J, T, C), got " + shape_string(x.value().shape()));
  }
  if (stride < 1) throw ConfigError("stride_frames: stride must be positive");
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kStrideFrames, {ix},
      [ix, stride](const Tape& t) { return kernels::stride_frames(t.value(ix), stride); },
      [ix, stride](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_buffer(ix);
        const Index joints = dx.dim(0), frames = dx.dim(1), channels = dx.dim(2);
        const Index out_frames = g.dim(1);
        for (Index j = 0; j < joints; ++j) {
          for (Index f = 0; f < out_frames; ++f) {
            dx.flat().segment((j * frames + f * stride) * channels, channels) +=
                g.flat().segment((j * out_frames + f) * channels, channels);
          }
        }
      });
}

Var mean_pool(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 3) throw DimensionError("mean_pool: expected (J, T, C), got " + shape_string(xv.shape()));
  count_aux(u64(xv.size()));
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kMeanPool, {ix},
      [ix](const Tape& t) {
        const Tensor& xs = t.value(ix);
        const Index channels = xs.dim(2);
        Tensor out({1, channels});
        out.flat() = xs.trailing_view().colwise().mean().transpose();
        return out;
      },
      [ix](Tape& t, const Tensor& g) {
        Tensor& dx = t.grad_buffer(ix);
        const double inv = 1.0 / static_cast<double>(dx.size() / dx.dim(2));
        dx.trailing_view().rowwise() += inv * g.flat().transpose();
      });
}

Var softmax_cross_entropy(Var logits, Index label) {
  const Tensor& lv = logits.value();
  if (label < 0 || label >= lv.size()) {
    throw IndexError("softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                     std::to_string(lv.size()) + ")");
  }
  const std::size_t il = logits.id;
  return logits.tape->record(
      OpKind::kSoftmaxCrossEntropy, {il},
      [il, label](const Tape& t) {
        const auto& z = t.value(il).flat();
        const double zmax = z.maxCoeff();
        const double lse = zmax + std::log((z.array() - zmax).exp().sum());
        return Tensor::filled({1}, lse - z[label]);
      },
      [il, label](Tape& t, const Tensor& g) {
        const auto& z = t.value(il).flat();
        const double zmax = z.maxCoeff();
        Eigen::VectorXd p = (z.array() - zmax).exp();
        p /= p.sum();
        p[label] -= 1.0;
        t.grad_buffer(il).flat() += g.flat()[0] * p;
      });
}

Var weighted_sum(Var x, const Tensor& weights) {
  if (weights.shape() != x.value().shape()) {
    throw DimensionError("weighted_sum: " + pair_shapes(x.value(), weights));
  }
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kWeightedSum, {ix},
      [ix, weights](const Tape& t) { return Tensor::filled({1}, t.value(ix).flat().dot(weights.flat())); },
      [ix, weights](Tape& t, const Tensor& g) { t.grad_buffer(ix).flat() += g.flat()[0] * weights.flat(); });
}

Var sum_squares(Var x) {
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kSumSquares, {ix},
      [ix](const Tape& t) { return Tensor::filled({1}, t.value(ix).flat().squaredNorm()); },
      [ix](Tape& t, const Tensor& g) { t.grad_buffer(ix).flat() += 2.0 * g.flat()[0] * t.value(ix).flat(); });
}

Var add_joint_encoding(Var y, Var encoding) {
  require_same_tape(y, encoding);
  const Tensor& yv = y.value();
  const Tensor& ev = encoding.value();
  if (yv.rank() != 4 || ev.rank() != 2 || ev.dim(0) != yv.dim(1) || ev.dim(1) != yv.dim(3)) {
    throw DimensionError("add_joint_encoding: " + pair_shapes(yv, ev));
  }
  count_aux(u64(yv.size()));
  const std::size_t iy = y.id, ie = encoding.id;
  return y.tape->record(
      OpKind::kAddJointEncoding, {iy, ie},
      [iy, ie](const Tape& t) {
        const Tensor& ys = t.value(iy);
        const Tensor& e = t.value(ie);
        Tensor out = ys;
        const Index persons = ys.dim(0), joints = ys.dim(1), frames = ys.dim(2), channels = ys.dim(3);
        for (Index i = 0; i < persons; ++i) {
          for (Index j = 0; j < joints; ++j) {
            Eigen::Map<RowMatrix<double>> block(out.data() + ((i * joints + j) * frames) * channels, frames,
                                                channels);
            block.rowwise() += e.flat().segment(j * channels, channels).transpose();
          }
        }
        return out;
      },
      [iy, ie](Tape& t, const Tensor& g) {
        t.grad_buffer(iy).flat() += g.flat();
        Tensor& de = t.grad_buffer(ie);
        const Index persons = g.dim(0), joints = g.dim(1), frames = g.dim(2), channels = g.dim(3);
        for (Index i = 0; i < persons; ++i) {
          for (Index j = 0; j < joints; ++j) {
            Eigen::Map<const RowMatrix<double>> block(g.data() + ((i * joints + j) * frames) * channels,
                                                      frames, channels);
            de.flat().segment(j * channels, channels) += block.colwise().sum().transpose();
          }
        }
      });
}

Var concat_instances(Var y) {
  const Tensor& yv = y.value();
  if (yv.rank() != 4) throw DimensionError("concat_instances: expected (I, J, T, C), got " + shape_string(yv.shape()));
  const std::size_t iy = y.id;
  return y.tape->record(
      OpKind::kConcatInstances, {iy},
      [iy](const Tape& t) {
        const Tensor& ys = t.value(iy);
        const Index persons = ys.dim(0), sites = ys.dim(1) * ys.dim(2), channels = ys.dim(3);
        Tensor out({ys.dim(1), ys.dim(2), persons * channels});
        auto dst = out.as_matrix(sites, persons * channels);
        for (Index i = 0; i < persons; ++i) {
          dst.middleCols(i * channels, channels) =
              Eigen::Map<const RowMatrix<double>>(ys.data() + i * sites * channels, sites, channels);
        }
        return out;
      },
      [iy](Tape& t, const Tensor& g) {
        Tensor& dy = t.grad_buffer(iy);
        const Index persons = dy.dim(0), sites = dy.dim(1) * dy.dim(2), channels = dy.dim(3);
        const auto src = g.as_matrix(sites, persons * channels);
        for (Index i = 0; i < persons; ++i) {
          Eigen::Map<RowMatrix<double>>(dy.data() + i * sites * channels, sites, channels) +=
              src.middleCols(i * channels, channels);
        }
      });
}

Var max_instances(Var z) {
  const Tensor& zv = z.value();
  if (zv.rank() != 4) throw DimensionError("max_instances: expected (I, J, T, C), got " + shape_string(zv.shape()));
  count_aux(u64(zv.size()));
  const std::size_t iz = z.id;
  return z.tape->record(
      OpKind::kMaxInstances, {iz},
      [iz](const Tape& t) {
        const Tensor& zs = t.value(iz);
        const Index persons = zs.dim(0), per = zs.size() / persons;
        Tensor out({zs.dim(1), zs.dim(2), zs.dim(3)});
        out.flat() = zs.flat().segment(0, per);
        for (Index i = 1; i < persons; ++i) out.flat() = out.flat().cwiseMax(zs.flat().segment(i * per, per));
        return out;
      },
      [iz](Tape& t, const Tensor& g) {
        const Tensor& zs = t.value(iz);
        Tensor& dz = t.grad_buffer(iz);
        const Index persons = zs.dim(0), per = zs.size() / persons;
        for (Index e = 0; e < per; ++e) {
          Index best = 0;
          for (Index i = 1; i < persons; ++i) {
            if (zs.flat()[i * per + e] > zs.flat()[best * per + e]) best = i;
          }
          dz.flat()[best * per + e] += g.flat()[e];
        }
      });
}

Var reshape(Var x, Shape shape) {
  if (shape_size(shape) != x.value().size()) {
    throw DimensionError("reshape: " + shape_string(x.value().shape()) + " to " + shape_string(shape));
  }
  const std::size_t ix = x.id;
  return x.tape->record(
      OpKind::kReshape, {ix},
      [ix, shape](const Tape& t) { return t.value(ix).reshaped(shape); },
      [ix](Tape& t, const Tensor& g) { t.grad_buffer(ix).flat() += g.flat(); });
}

}  // namespace skelet
