#pragma once

// Loop-level reference implementations used as independent oracles. Nothing
// here calls the library's kernels; only containers and parameter storage
// are shared.

#include <cmath>
#include <queue>
#include <random>
#include <vector>

#include "skelet/block.hpp"
#include "skelet/network.hpp"

namespace oracle {

using skelet::Index;
using skelet::Tensor;

inline Tensor random_tensor(skelet::Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.flat()[i] = normal(rng);
  return t;
}

// out[k, ...] = sum_j m(j, k) * x[j, ...]
inline Tensor contract(const Eigen::MatrixXd& m, const Tensor& x) {
  const Index rest = x.size() / x.dim(0);
  skelet::Shape shape = x.shape();
  shape[0] = m.cols();
  Tensor out(shape);
  for (Index k = 0; k < m.cols(); ++k) {
    for (Index r = 0; r < rest; ++r) {
      double acc = 0.0;
      for (Index j = 0; j < m.rows(); ++j) acc += m(j, k) * x.flat()[j * rest + r];
      out.flat()[k * rest + r] = acc;
    }
  }
  return out;
}

// (J, T, Cin) * (k, Cin, Cout), zero padding k/2 on both sides.
inline Tensor temporal_conv(const Tensor& x, const Tensor& w, Index stride) {
  const Index J = x.dim(0), T = x.dim(1), cin = x.dim(2);
  const Index taps = w.dim(0), cout = w.dim(2), pad = taps / 2;
  const Index t_out = (T + stride - 1) / stride;
  Tensor out({J, t_out, cout});
  for (Index j = 0; j < J; ++j) {
    for (Index t = 0; t < t_out; ++t) {
      for (Index o = 0; o < cout; ++o) {
        double acc = 0.0;
        for (Index s = 0; s < taps; ++s) {
          const Index src = t * stride + s - pad;
          if (src < 0 || src >= T) continue;
          for (Index c = 0; c < cin; ++c) acc += x(j, src, c) * w(s, c, o);
        }
        out(j, t, o) = acc;
      }
    }
  }
  return out;
}

inline Tensor channel_map(const Tensor& x, const Tensor& w) {
  const Index rows = x.size() / x.shape().back();
  const Index cin = w.dim(0), cout = w.dim(1);
  skelet::Shape shape = x.shape();
  shape.back() = cout;
  Tensor out(shape);
  for (Index r = 0; r < rows; ++r) {
    for (Index o = 0; o < cout; ++o) {
      double acc = 0.0;
      for (Index c = 0; c < cin; ++c) acc += x.flat()[r * cin + c] * w(c, o);
      out.flat()[r * cout + o] = acc;
    }
  }
  return out;
}

inline Tensor scale_shift(Tensor x, const Tensor& scale, const Tensor& bias) {
  const Index c = x.shape().back();
  for (Index i = 0; i < x.size(); ++i) x.flat()[i] = x.flat()[i] * scale.flat()[i % c] + bias.flat()[i % c];
  return x;
}

inline Tensor rectify(Tensor x) {
  for (Index i = 0; i < x.size(); ++i) x.flat()[i] = x.flat()[i] > 0.0 ? x.flat()[i] : 0.0;
  return x;
}

inline Tensor every_other(const Tensor& x, Index stride) {
  const Index J = x.dim(0), T = x.dim(1), C = x.dim(2);
  const Index t_out = (T + stride - 1) / stride;
  Tensor out({J, t_out, C});
  for (Index j = 0; j < J; ++j)
    for (Index t = 0; t < t_out; ++t)
      for (Index c = 0; c < C; ++c) out(j, t, c) = x(j, t * stride, c);
  return out;
}

// The plain block of a graph-convolution network:
//   out = affine(T(relu(affine(A_hat X W_g) W))) + res(X)
// written out directly with no channel groups and no joint mapping.
inline Tensor baseline_block(const Tensor& x, const Eigen::MatrixXd& a_hat, const skelet::BlockConfig& cfg,
                             const skelet::BlockParams& p) {
  const Index J = x.dim(0), T = x.dim(1), cin = x.dim(2), cout = cfg.out_channels;
  Tensor g({J, T, cout});
  for (Index i = 0; i < J; ++i)
    for (Index t = 0; t < T; ++t)
      for (Index o = 0; o < cout; ++o) {
        double acc = 0.0;
        for (Index j = 0; j < J; ++j)
          for (Index c = 0; c < cin; ++c) acc += a_hat(i, j) * x(j, t, c) * p.graph_weights[0].value(c, o);
        g(i, t, o) = acc;
      }
  g = scale_shift(g, p.graph_scale.value, p.graph_bias.value);
  Tensor h = cfg.order == skelet::ActivationOrder::kProjectThenActivate
                 ? rectify(channel_map(g, p.shared_weight.value))
                 : channel_map(rectify(g), p.shared_weight.value);
  Tensor y = scale_shift(temporal_conv(h, p.temporal_kernel.value, cfg.temporal_stride), p.temporal_scale.value,
                         p.temporal_bias.value);
  Tensor res = every_other(x, cfg.temporal_stride);
  if (p.residual_projection) res = channel_map(res, p.residual_projection->value);
  for (Index i = 0; i < y.size(); ++i) y.flat()[i] += res.flat()[i];
  return y;
}

inline Eigen::MatrixXd mapping_dense(const skelet::MappingMatrix& m) {
  const Tensor& w = m.weights.value;
  if (m.kind == skelet::MappingKind::kDownsample) {
    Eigen::MatrixXd d(w.dim(0), w.dim(1));
    for (Index r = 0; r < w.dim(0); ++r)
      for (Index c = 0; c < w.dim(1); ++c) d(r, c) = w(r, c);
    return d;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(w.dim(0), w.dim(0));
  for (Index r = 0; r < w.dim(0); ++r) d(r, r) = w.flat()[r];
  return d;
}

// Grouped block with per-group joint mapping, by loops.
inline Tensor grouped_block(const Tensor& x, const Eigen::MatrixXd& a_hat, const skelet::BlockConfig& cfg,
                            const skelet::BlockParams& p) {
  const Index T = x.dim(1), K = cfg.groups;
  const Index win = cfg.in_channels / K, wout = cfg.out_channels / K, cout = cfg.out_channels;
  const Index jo = a_hat.rows();
  Tensor g({jo, T, cout});
  Tensor mapped_all({jo, T, cfg.in_channels});
  for (Index k = 0; k < K; ++k) {
    Tensor xk({x.dim(0), T, win});
    for (Index j = 0; j < x.dim(0); ++j)
      for (Index t = 0; t < T; ++t)
        for (Index c = 0; c < win; ++c) xk(j, t, c) = x(j, t, k * win + c);
    Tensor z = cfg.use_mapping ? contract(mapping_dense(p.mappings[static_cast<std::size_t>(k)]), xk) : xk;
    for (Index j = 0; j < z.dim(0) && z.dim(0) == jo; ++j)
      for (Index t = 0; t < T; ++t)
        for (Index c = 0; c < win; ++c) mapped_all(j, t, k * win + c) = z(j, t, c);
    const Tensor& w = p.graph_weights[static_cast<std::size_t>(k)].value;
    for (Index i = 0; i < jo; ++i)
      for (Index t = 0; t < T; ++t)
        for (Index o = 0; o < wout; ++o) {
          double acc = 0.0;
          for (Index j = 0; j < jo; ++j)
            for (Index c = 0; c < win; ++c) acc += a_hat(i, j) * z(j, t, c) * w(c, o);
          g(i, t, k * wout + o) = acc;
        }
  }
  g = scale_shift(g, p.graph_scale.value, p.graph_bias.value);
  Tensor h = cfg.order == skelet::ActivationOrder::kProjectThenActivate
                 ? rectify(channel_map(g, p.shared_weight.value))
                 : channel_map(rectify(g), p.shared_weight.value);
  Tensor y = scale_shift(temporal_conv(h, p.temporal_kernel.value, cfg.temporal_stride), p.temporal_scale.value,
                         p.temporal_bias.value);
  const bool mapped_residual = cfg.use_mapping && cfg.kind == skelet::BlockKind::kDownsample;
  Tensor res = every_other(mapped_residual ? mapped_all : x, cfg.temporal_stride);
  if (p.residual_projection) res = channel_map(res, p.residual_projection->value);
  for (Index i = 0; i < y.size(); ++i) y.flat()[i] += res.flat()[i];
  return y;
}

// Full network by loops: blocks, mean over joints and frames, linear head.
inline std::vector<double> network_logits(const skelet::Network& net, const Tensor& x) {
  Tensor h = x;
  for (std::size_t b = 0; b < net.blocks.size(); ++b) {
    const auto& a = net.stage_normalized[static_cast<std::size_t>(net.block_stage(b))];
    h = grouped_block(h, a, net.blocks[b], net.params[b]);
  }
  const Index J = h.dim(0), T = h.dim(1), C = h.dim(2);
  std::vector<double> pooled(static_cast<std::size_t>(C), 0.0);
  for (Index j = 0; j < J; ++j)
    for (Index t = 0; t < T; ++t)
      for (Index c = 0; c < C; ++c) pooled[static_cast<std::size_t>(c)] += h(j, t, c);
  for (double& v : pooled) v /= static_cast<double>(J * T);
  const Index classes = net.config.num_classes;
  std::vector<double> logits(static_cast<std::size_t>(classes));
  for (Index n = 0; n < classes; ++n) {
    double acc = net.classifier_bias.value.flat()[n];
    for (Index c = 0; c < C; ++c) acc += pooled[static_cast<std::size_t>(c)] * net.classifier_weight.value(c, n);
    logits[static_cast<std::size_t>(n)] = acc;
  }
  return logits;
}

// Number of connected components of an undirected graph given as an edge list.
inline int components(Index nodes, const std::vector<std::pair<Index, Index>>& edges) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(nodes));
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
  int count = 0;
  for (Index s = 0; s < nodes; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++count;
    std::queue<Index> q;
    q.push(s);
    seen[static_cast<std::size_t>(s)] = 1;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (Index v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          q.push(v);
        }
      }
    }
  }
  return count;
}

// Central-difference derivative of a scalar function of one tensor entry.
template <typename F>
double numeric_derivative(F&& f, double& coordinate, double step = 1e-5) {
  const double saved = coordinate;
  coordinate = saved + step;
  const double plus = f();
  coordinate = saved - step;
  const double minus = f();
  coordinate = saved;
  return (plus - minus) / (2.0 * step);
}

}  // namespace oracle
