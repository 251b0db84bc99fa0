#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "skelet/mapping.hpp"

namespace skelet {

enum class BlockKind { kNormal, kDownsample };

/// Placement of the shared channel map relative to the activation.
enum class ActivationOrder { kProjectThenActivate, kActivateThenProject };

struct BlockConfig {
  int index = 1;  // 1-based position in the network
  BlockKind kind = BlockKind::kNormal;
  Index joints = 0;  // input joints
  Index in_channels = 0;
  Index out_channels = 0;
  Index groups = 1;
  Index temporal_kernel = 5;
  Index temporal_stride = 1;
  /// False builds the plain graph/temporal block: no mapping matrices, one
  /// group, joints unchanged.
  bool use_mapping = true;
  std::optional<PartitionMap> partition;  // downsample blocks only
  ActivationOrder order = ActivationOrder::kProjectThenActivate;

  Index output_joints() const;
  bool has_residual_projection() const { return in_channels != out_channels; }
  void validate() const;
};

/// Learnable state of one block. Graph and temporal layers each carry a
/// per-channel scale and bias in place of batch normalization.
struct BlockParams {
  std::vector<MappingMatrix> mappings;   // one per group (empty without mapping)
  std::vector<Parameter> graph_weights;  // per group (Cin/K, Cout/K)
  Parameter graph_scale;                 // (Cout)
  Parameter graph_bias;                  // (Cout)
  Parameter shared_weight;               // (Cout, Cout)
  Parameter temporal_kernel;             // (k, Cout, Cout)
  Parameter temporal_scale;              // (Cout)
  Parameter temporal_bias;               // (Cout)
  std::optional<Parameter> residual_projection;  // (Cin, Cout) when widths differ

  std::vector<std::pair<std::string, Parameter*>> named_parameters(const std::string& prefix);
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; mapping matrices from
/// the partition (downsample) or the identity (reweight); scales 1, biases 0.
BlockParams init_block_params(const BlockConfig& cfg, std::mt19937_64& rng);

/// One grouped-mapping block on a (J, T, Cin) input:
///
///   Z_k = M_k X_k                        per channel group k
///   G   = concat_k(A_hat Z_k W_k)        graph conv on the mapped joints
///   H   = relu(affine(G) W)              (or W after relu, per cfg.order)
///   out = affine(temporal_conv(H)) + res(X)
///
/// `graph_adjacency` is the normalized adjacency over the block's output
/// joints. res(X) is X for normal blocks and concat_k(M_k X_k) for
/// downsample blocks, frame-strided to match and channel-projected when the
/// widths differ.
Var grouped_mapping_block(Var x, const Eigen::MatrixXd& graph_adjacency, const BlockConfig& cfg,
                          BlockParams& params);

}  // namespace skelet
