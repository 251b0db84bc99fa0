#pragma once

#include "skelet/ops.hpp"
#include "skelet/partition.hpp"

namespace skelet {

enum class MappingKind { kDownsample, kReweight };

/// Learnable joint mapping. Downsample matrices are stored dense as
/// (J_in, J_out); reweight matrices store only their diagonal (J), so the
/// off-diagonal is zero by construction.
struct MappingMatrix {
  MappingKind kind = MappingKind::kReweight;
  Parameter weights;

  Index source_joints() const { return weights.value.dim(0); }
  Index target_joints() const {
    return kind == MappingKind::kDownsample ? weights.value.dim(1) : weights.value.dim(0);
  }

  /// Full (J_in, J_out) matrix.
  Eigen::MatrixXd dense() const;
};

/// Column k holds 1/|P_k| on the rows of part k and zero elsewhere.
MappingMatrix init_downsample_matrix(const PartitionMap& partition);

/// Identity diagonal of length `joints`.
MappingMatrix init_reweight_matrix(Index joints);

/// Contracts the joint axis of a (J_in, ...) tensor: out = M^T x for
/// downsampling, diag(m) x for reweighting.
Tensor apply_mapping(const MappingMatrix& m, const Tensor& x);

/// Tape form; `weights` is the bound mapping parameter.
Var apply_mapping(MappingKind kind, Var weights, Var x);

/// A' = M^T A M for a downsample matrix. Throws ConfigError for reweight
/// matrices and DimensionError when A does not match M's source joints.
Eigen::MatrixXd transform_adjacency(const Eigen::MatrixXd& a, const MappingMatrix& m);

}  // namespace skelet
