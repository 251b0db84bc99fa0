#include "skelet/instance_pooling.hpp"

#include <algorithm>
#include <cmath>

namespace skelet {

void IPConfig::validate() const {
  if (max_persons < 1) throw ConfigError("instance pooling needs at least one person slot");
  if (in_channels < 1 || channels < 1 || joints < 1) {
    throw ConfigError("instance pooling widths and joint count must be positive");
  }
}

std::vector<std::pair<std::string, Parameter*>> IPParams::named_parameters() {
  return {{"ip.embed_weight", &embed_weight},   {"ip.embed_bias", &embed_bias},
          {"ip.encoding", &encoding},           {"ip.concat_weight", &concat_weight},
          {"ip.concat_bias", &concat_bias}};
}

namespace {

Parameter uniform_param(Shape shape, Index fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t.flat()[i] = dist(rng);
  return Parameter(std::move(t));
}

}  // namespace

IPParams init_ip_params(const IPConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  IPParams p;
  p.embed_weight = uniform_param({cfg.in_channels, cfg.channels}, cfg.in_channels, rng);
  p.embed_bias = Parameter(Tensor::zeros({cfg.channels}));
  p.encoding = Parameter(Tensor::zeros({cfg.joints, cfg.channels}));
  p.concat_weight = uniform_param({cfg.max_persons * cfg.channels, cfg.channels},
                                  cfg.max_persons * cfg.channels, rng);
  p.concat_bias = Parameter(Tensor::zeros({cfg.channels}));
  return p;
}

Tensor crop_persons(const Tensor& x, const IPConfig& cfg) {
  if (x.rank() != 4) throw DimensionError("expected (I, J, T, C) input, got " + shape_string(x.shape()));
  const Index persons = x.dim(0);
  if (persons <= cfg.max_persons) return x;
  if (!cfg.crop_overflow) {
    throw DimensionError(std::to_string(persons) + " persons exceed the configured maximum of " +
                         std::to_string(cfg.max_persons));
  }
  Tensor out({cfg.max_persons, x.dim(1), x.dim(2), x.dim(3)});
  out.flat() = x.flat().head(out.size());
  return out;
}

Var embed_instances(Var x, const IPConfig& cfg, IPParams& params) {
  const Shape s = x.value().shape();
  if (s.size() != 4 || s[1] != cfg.joints || s[3] != cfg.in_channels) {
    throw DimensionError("embed_instances: expected (I, " + std::to_string(cfg.joints) + ", T, " +
                         std::to_string(cfg.in_channels) + "), got " + shape_string(s));
  }
  if (s[0] > cfg.max_persons) {
    throw DimensionError("embed_instances: " + std::to_string(s[0]) + " persons exceed " +
                         std::to_string(cfg.max_persons));
  }
  Tape& tape = *x.tape;
  Var y = pointwise(x, tape.parameter(params.embed_weight));
  y = add_bias(y, tape.parameter(params.embed_bias));
  return add_joint_encoding(y, tape.parameter(params.encoding));
}

Var concat_pool(Var y, IPParams& params) {
  const Shape s = y.value().shape();
  const Index rows = params.concat_weight.value.dim(0);
  const Index width = params.concat_weight.value.dim(1);
  if (s.size() != 4 || s[3] != width || s[0] * s[3] > rows) {
    throw DimensionError("concat_pool: input " + shape_string(s) + " does not match weights " +
                         shape_string(params.concat_weight.value.shape()));
  }
  Tape& tape = *y.tape;
  Var stacked = concat_instances(y);
  Var weight = tape.parameter(params.concat_weight);
  if (s[0] * s[3] < rows) weight = slice_rows(weight, 0, s[0] * s[3]);
  Var pooled = pointwise(stacked, weight);
  pooled = add_bias(pooled, tape.parameter(params.concat_bias));
  return reshape(pooled, {1, s[1], s[2], params.concat_weight.value.dim(1)});
}

Var group_pool(Var z) { return max_instances(z); }

Var instance_pool(Var x, const IPConfig& cfg, IPParams& params) {
  cfg.validate();
  Tape& tape = *x.tape;
  Var fitted = x.value().dim(0) <= cfg.max_persons ? x : tape.constant(crop_persons(x.value(), cfg));
  Var y = embed_instances(fitted, cfg, params);
  Var fused = relu(add(concat_pool(y, params), y));
  return group_pool(fused);
}

}  // namespace skelet
