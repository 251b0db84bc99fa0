#include "skelet/block.hpp"

#include <cmath>

namespace skelet {

Index BlockConfig::output_joints() const {
  if (use_mapping && kind == BlockKind::kDownsample && partition) return partition->target_count();
  return joints;
}

void BlockConfig::validate() const {
  const std::string where = "block " + std::to_string(index) + ": ";
  if (joints < 1 || in_channels < 1 || out_channels < 1) {
    throw ConfigError(where + "joints and channel widths must be positive");
  }
  if (groups < 1 || in_channels % groups != 0 || out_channels % groups != 0) {
    throw ConfigError(where + "group count " + std::to_string(groups) + " must divide " +
                      std::to_string(in_channels) + " and " + std::to_string(out_channels) + " channels");
  }
  if (temporal_kernel < 1 || temporal_kernel % 2 == 0) {
    throw ConfigError(where + "temporal kernel size must be odd, got " + std::to_string(temporal_kernel));
  }
  const bool down = kind == BlockKind::kDownsample;
  if (temporal_stride != (down ? 2 : 1)) {
    throw ConfigError(where + "downsample blocks use stride 2, normal blocks stride 1");
  }
  if (use_mapping) {
    if (down != partition.has_value()) {
      throw ConfigError(where + "a partition is required exactly for downsample blocks");
    }
    if (partition) {
      partition->validate();
      if (partition->source_count != joints) {
        throw DimensionError(where + "partition covers " + std::to_string(partition->source_count) +
                             " joints, block input has " + std::to_string(joints));
      }
    }
  } else {
    if (groups != 1) throw ConfigError(where + "blocks without mapping use a single group");
    if (partition) throw ConfigError(where + "blocks without mapping take no partition");
  }
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

std::vector<std::pair<std::string, Parameter*>> BlockParams::named_parameters(const std::string& prefix) {
  std::vector<std::pair<std::string, Parameter*>> out;
  for (std::size_t k = 0; k < mappings.size(); ++k) {
    out.emplace_back(prefix + ".mapping." + std::to_string(k), &mappings[k].weights);
  }
  for (std::size_t k = 0; k < graph_weights.size(); ++k) {
    out.emplace_back(prefix + ".graph_weight." + std::to_string(k), &graph_weights[k]);
  }
  out.emplace_back(prefix + ".graph_scale", &graph_scale);
  out.emplace_back(prefix + ".graph_bias", &graph_bias);
  out.emplace_back(prefix + ".shared_weight", &shared_weight);
  out.emplace_back(prefix + ".temporal_kernel", &temporal_kernel);
  out.emplace_back(prefix + ".temporal_scale", &temporal_scale);
  out.emplace_back(prefix + ".temporal_bias", &temporal_bias);
  if (residual_projection) out.emplace_back(prefix + ".residual_projection", &*residual_projection);
  return out;
}

BlockParams init_block_params(const BlockConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  BlockParams p;
  const Index k = cfg.groups;
  const Index win = cfg.in_channels / k, wout = cfg.out_channels / k;
  const Index cout = cfg.out_channels;
  if (cfg.use_mapping) {
    for (Index g = 0; g < k; ++g) {
      p.mappings.push_back(cfg.kind == BlockKind::kDownsample ? init_downsample_matrix(*cfg.partition)
                                                              : init_reweight_matrix(cfg.joints));
    }
  }
  for (Index g = 0; g < k; ++g) p.graph_weights.push_back(uniform_param({win, wout}, win, rng));
  p.graph_scale = Parameter(Tensor::filled({cout}, 1.0));
  p.graph_bias = Parameter(Tensor::zeros({cout}));
  p.shared_weight = uniform_param({cout, cout}, cout, rng);
  p.temporal_kernel = uniform_param({cfg.temporal_kernel, cout, cout}, cfg.temporal_kernel * cout, rng);
  p.temporal_scale = Parameter(Tensor::filled({cout}, 1.0));
  p.temporal_bias = Parameter(Tensor::zeros({cout}));
  if (cfg.has_residual_projection()) {
    p.residual_projection = uniform_param({cfg.in_channels, cout}, cfg.in_channels, rng);
  }
  return p;
}

Var grouped_mapping_block(Var x, const Eigen::MatrixXd& graph_adjacency, const BlockConfig& cfg,
                          BlockParams& params) {
  cfg.validate();
  Tape& tape = *x.tape;
  const Shape in = x.value().shape();
  if (in.size() != 3 || in[0] != cfg.joints || in[2] != cfg.in_channels) {
    throw DimensionError("block " + std::to_string(cfg.index) + ": expected (" + std::to_string(cfg.joints) +
                         ", T, " + std::to_string(cfg.in_channels) + ") input, got " + shape_string(in));
  }
  const Index out_joints = cfg.output_joints();
  if (graph_adjacency.rows() != out_joints || graph_adjacency.cols() != out_joints) {
    throw DimensionError("block " + std::to_string(cfg.index) + ": adjacency is " +
                         std::to_string(graph_adjacency.rows()) + "x" + std::to_string(graph_adjacency.cols()) +
                         ", expected " + std::to_string(out_joints) + " joints");
  }
  if (cfg.use_mapping && params.mappings.size() != static_cast<std::size_t>(cfg.groups)) {
    throw ConfigError("block " + std::to_string(cfg.index) + ": expected one mapping matrix per group");
  }

  const Index groups = cfg.groups;
  const Index width = cfg.in_channels / groups;
  // contract_joints computes map^T x, so hand it A_hat^T to get A_hat x.
  const Var adjacency_t = tape.constant(Tensor::from_matrix(graph_adjacency.transpose()));

  std::vector<Var> mapped;
  std::vector<Var> graph_out;
  for (Index g = 0; g < groups; ++g) {
    Var xg = groups == 1 ? x : slice_channels(x, g * width, (g + 1) * width);
    if (cfg.use_mapping) {
      MappingMatrix& m = params.mappings[static_cast<std::size_t>(g)];
      xg = apply_mapping(m.kind, tape.parameter(m.weights), xg);
    }
    mapped.push_back(xg);
    Var propagated = contract_joints(adjacency_t, xg);
    graph_out.push_back(pointwise(propagated, tape.parameter(params.graph_weights[static_cast<std::size_t>(g)])));
  }

  Var g = groups == 1 ? graph_out.front() : concat_channels(graph_out);
  g = affine(g, tape.parameter(params.graph_scale), tape.parameter(params.graph_bias));
  const Var shared = tape.parameter(params.shared_weight);
  Var h = cfg.order == ActivationOrder::kProjectThenActivate ? relu(pointwise(g, shared))
                                                              : pointwise(relu(g), shared);
  Var t = temporal_conv(h, tape.parameter(params.temporal_kernel), cfg.temporal_stride);
  t = affine(t, tape.parameter(params.temporal_scale), tape.parameter(params.temporal_bias));

  Var residual = x;
  if (cfg.use_mapping && cfg.kind == BlockKind::kDownsample) {
    residual = groups == 1 ? mapped.front() : concat_channels(mapped);
  }
  if (cfg.temporal_stride != 1) residual = stride_frames(residual, cfg.temporal_stride);
  if (params.residual_projection) residual = pointwise(residual, tape.parameter(*params.residual_projection));
  return add(t, residual);
}

}  // namespace skelet
