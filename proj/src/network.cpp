#include "skelet/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skelet/kernels.hpp"

namespace skelet {

bool NetworkConfig::is_downsample(int block) const {
  return std::find(downsample_blocks.begin(), downsample_blocks.end(), block) != downsample_blocks.end();
}

void NetworkConfig::validate() const {
  for (Index c : channels) {
    if (c < 1) throw ConfigError("block channel widths must be positive");
  }
  for (std::size_t i = 0; i < downsample_blocks.size(); ++i) {
    const int b = downsample_blocks[i];
    if (b < 1 || b > static_cast<int>(channels.size())) {
      throw ConfigError("downsample block " + std::to_string(b) + " outside 1.." +
                        std::to_string(channels.size()));
    }
    if (i > 0 && b <= downsample_blocks[i - 1]) throw ConfigError("downsample blocks must be strictly ascending");
  }
  if (static_cast<Index>(joints.size()) != stage_count()) {
    throw ConfigError("joint schedule has " + std::to_string(joints.size()) + " entries, expected " +
                      std::to_string(stage_count()));
  }
  if (static_cast<Index>(groups.size()) != stage_count()) {
    throw ConfigError("group schedule has " + std::to_string(groups.size()) + " entries, expected " +
                      std::to_string(stage_count()));
  }
  if (group_expand < 1) throw ConfigError("group expand factor must be positive");
  for (std::size_t s = 0; s < groups.size(); ++s) {
    if (groups[s] < 1) throw ConfigError("group counts must be positive");
    if (s > 0 && groups[s] != group_expand * groups[s - 1]) {
      throw ConfigError("group schedule must grow by the expand factor at every stage");
    }
  }
  for (Index j : joints) {
    if (j < 1) throw ConfigError("joint counts must be positive");
  }
  if (temporal_kernel < 1 || temporal_kernel % 2 == 0) throw ConfigError("temporal kernel size must be odd");
  if (in_channels < 1 || num_classes < 1 || frames < 1) {
    throw ConfigError("input channels, class count and frame count must be positive");
  }
}

std::string NetworkConfig::canonical() const {
  std::ostringstream os;
  auto list = [&os](const char* key, const auto& v) {
    os << key << '=';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ';';
  };
  list("channels", channels);
  list("downsample", downsample_blocks);
  list("joints", joints);
  list("groups", groups);
  os << "expand=" << group_expand << ";kernel=" << temporal_kernel << ";in=" << in_channels
     << ";classes=" << num_classes << ";frames=" << frames
     << ";order=" << (order == ActivationOrder::kProjectThenActivate ? "project-then-activate" : "activate-then-project")
     << ";norm=" << (adjacency_norm == AdjacencyNorm::kRow ? "row" : "symmetric") << ';';
  return os.str();
}

NetworkConfig toy_network_config(Index joints, Index frames, Index num_classes, Index in_channels) {
  NetworkConfig cfg;
  cfg.channels = {8, 16, 16};
  cfg.downsample_blocks = {2};
  cfg.joints = {joints, (joints + 1) / 2};
  cfg.groups = {1, 2};
  cfg.group_expand = 2;
  cfg.temporal_kernel = 3;
  cfg.in_channels = in_channels;
  cfg.num_classes = num_classes;
  cfg.frames = frames;
  return cfg;
}

std::vector<std::pair<std::string, Parameter*>> Network::named_parameters() {
  std::vector<std::pair<std::string, Parameter*>> out;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto block = params[b].named_parameters("block" + std::to_string(b + 1));
    out.insert(out.end(), block.begin(), block.end());
  }
  out.emplace_back("classifier.weight", &classifier_weight);
  out.emplace_back("classifier.bias", &classifier_bias);
  return out;
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& [name, p] : named_parameters()) out.push_back(p);
  return out;
}

Index Network::block_stage(std::size_t block) const {
  if (!skelet) return 0;
  Index stage = 0;
  for (std::size_t b = 0; b <= block; ++b) {
    if (config.is_downsample(static_cast<int>(b + 1))) ++stage;
  }
  return stage;
}

std::vector<std::pair<Index, Index>> Network::shape_trace() const {
  std::vector<std::pair<Index, Index>> trace;
  Index frames = config.frames;
  for (const auto& b : blocks) {
    frames = kernels::strided_length(frames, b.temporal_stride);
    trace.emplace_back(b.output_joints(), frames);
  }
  return trace;
}

std::uint64_t Network::config_hash() const {
  // FNV-1a, 64-bit.
  std::uint64_t h = 1469598103934665603ULL;
  const std::string text = config.canonical() + (skelet ? "skelet=on;" : "skelet=off;");
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Network build_network(const NetworkConfig& cfg, const KeypointLayout& layout,
                      std::span<const PartitionMap> partitions, bool skelet, std::uint64_t seed) {
  cfg.validate();
  if (layout.count() != cfg.joints.front()) {
    throw ConfigError("layout '" + layout.id + "' has " + std::to_string(layout.count()) +
                      " joints, network expects " + std::to_string(cfg.joints.front()));
  }
  Network net;
  net.config = cfg;
  net.skelet = skelet;

  net.stage_adjacency.push_back(add_self_links(build_adjacency(layout)));
  if (skelet) {
    if (static_cast<Index>(partitions.size()) != cfg.stage_count() - 1) {
      throw ConfigError("expected " + std::to_string(cfg.stage_count() - 1) + " partitions, got " +
                        std::to_string(partitions.size()));
    }
    for (std::size_t s = 0; s < partitions.size(); ++s) {
      const PartitionMap& p = partitions[s];
      p.validate();
      if (p.source_count != cfg.joints[s] || p.target_count() != cfg.joints[s + 1]) {
        throw ConfigError("partition " + std::to_string(s) + " maps " + std::to_string(p.source_count) + "->" +
                          std::to_string(p.target_count()) + " joints, schedule needs " +
                          std::to_string(cfg.joints[s]) + "->" + std::to_string(cfg.joints[s + 1]));
      }
      net.stage_adjacency.push_back(transform_adjacency(net.stage_adjacency.back(), init_downsample_matrix(p)));
    }
  }
  for (const auto& a : net.stage_adjacency) net.stage_normalized.push_back(normalize_adjacency(a, cfg.adjacency_norm));

  std::mt19937_64 rng(seed);
  Index stage = 0;
  Index in_channels = cfg.in_channels;
  for (Index b = 0; b < cfg.block_count(); ++b) {
    const int index = static_cast<int>(b + 1);
    const bool down = cfg.is_downsample(index);
    BlockConfig bc;
    bc.index = index;
    bc.kind = down ? BlockKind::kDownsample : BlockKind::kNormal;
    bc.joints = skelet ? cfg.joints[static_cast<std::size_t>(stage)] : cfg.joints.front();
    if (down) ++stage;
    bc.in_channels = in_channels;
    bc.out_channels = cfg.channels[static_cast<std::size_t>(b)];
    bc.temporal_kernel = cfg.temporal_kernel;
    bc.temporal_stride = down ? 2 : 1;
    bc.order = cfg.order;
    bc.use_mapping = skelet;
    bc.groups = skelet ? cfg.groups[static_cast<std::size_t>(stage)] : 1;
    if (skelet && down) bc.partition = partitions[static_cast<std::size_t>(stage - 1)];
    net.params.push_back(init_block_params(bc, rng));
    net.blocks.push_back(std::move(bc));
    in_channels = net.blocks.back().out_channels;
  }

  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w({in_channels, cfg.num_classes});
  for (Index i = 0; i < w.size(); ++i) w.flat()[i] = dist(rng);
  net.classifier_weight = Parameter(std::move(w));
  net.classifier_bias = Parameter(Tensor::zeros({cfg.num_classes}));
  return net;
}

Var forward(Network& net, Var x) {
  const Shape s = x.value().shape();
  const NetworkConfig& cfg = net.config;
  if (s.size() != 3 || s[0] != cfg.joints.front() || s[1] != cfg.frames || s[2] != cfg.in_channels) {
    throw DimensionError("network expects input (" + std::to_string(cfg.joints.front()) + ", " +
                         std::to_string(cfg.frames) + ", " + std::to_string(cfg.in_channels) + "), got " +
                         shape_string(s));
  }
  Tape& tape = *x.tape;
  Var h = x;
  for (std::size_t b = 0; b < net.blocks.size(); ++b) {
    const auto& adjacency = net.stage_normalized[static_cast<std::size_t>(net.block_stage(b))];
    h = grouped_mapping_block(h, adjacency, net.blocks[b], net.params[b]);
  }
  Var pooled = mean_pool(h);
  Var logits = pointwise(pooled, tape.parameter(net.classifier_weight));
  return add_bias(logits, tape.parameter(net.classifier_bias));
}

Tensor infer(Network& net, const Tensor& x) {
  Tape tape;
  Var logits = forward(net, tape.constant(x));
  return tape.value(logits).reshaped({net.config.num_classes});
}

}  // namespace skelet
