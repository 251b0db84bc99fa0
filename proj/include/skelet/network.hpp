#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skelet/adjacency.hpp"
#include "skelet/block.hpp"
#include "skelet/layout.hpp"

namespace skelet {

struct NetworkConfig {
  std::vector<Index> channels{64, 64, 64, 64, 128, 128, 128, 256, 256, 256};
  std::vector<int> downsample_blocks{5, 8};  // 1-based, ascending
  std::vector<Index> joints{65, 27, 11};     // one entry per stage
  std::vector<Index> groups{1, 2, 4};        // one entry per stage
  Index group_expand = 2;
  Index temporal_kernel = 5;
  Index in_channels = 3;
  Index num_classes = 60;
  Index frames = 100;
  ActivationOrder order = ActivationOrder::kProjectThenActivate;
  AdjacencyNorm adjacency_norm = AdjacencyNorm::kRow;

  Index block_count() const { return static_cast<Index>(channels.size()); }
  Index stage_count() const { return static_cast<Index>(downsample_blocks.size()) + 1; }
  bool is_downsample(int block) const;

  /// Throws ConfigError when the schedule is inconsistent.
  void validate() const;

  /// Deterministic text rendering; hashed into parameter files.
  std::string canonical() const;
};

/// Three blocks, widths [8, 16, 16], one downsample at block 2 halving the
/// joint count, groups [1, 2].
NetworkConfig toy_network_config(Index joints, Index frames, Index num_classes, Index in_channels = 3);

struct Network {
  NetworkConfig config;
  bool skelet = true;
  std::vector<BlockConfig> blocks;
  std::vector<BlockParams> params;
  /// Self-linked adjacency per stage: A0 + I from the layout, then
  /// M^T A M through each stage's freshly initialized downsample matrix.
  std::vector<Eigen::MatrixXd> stage_adjacency;
  std::vector<Eigen::MatrixXd> stage_normalized;
  Parameter classifier_weight;  // (C_last, classes)
  Parameter classifier_bias;    // (classes)

  std::vector<std::pair<std::string, Parameter*>> named_parameters();
  std::vector<Parameter*> parameters();

  /// Stage index each block's graph convolution runs on.
  Index block_stage(std::size_t block) const;

  /// (joints, frames) at the output of every block for the configured input.
  std::vector<std::pair<Index, Index>> shape_trace() const;

  std::uint64_t config_hash() const;
};

/// With skelet on, downsample blocks carry per-group downsample matrices
/// seeded from `partitions` (one per downsample) and the other blocks carry
/// reweight matrices. With skelet off every block is a single-group block
/// without mapping on the full joint set; `partitions` is ignored.
Network build_network(const NetworkConfig& cfg, const KeypointLayout& layout,
                      std::span<const PartitionMap> partitions, bool skelet, std::uint64_t seed);

/// Single-person forward: (J, T, C) -> logits (1, classes).
Var forward(Network& net, Var x);

/// Pure inference helper returning the logit vector.
Tensor infer(Network& net, const Tensor& x);

}  // namespace skelet
