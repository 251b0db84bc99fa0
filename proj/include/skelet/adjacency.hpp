#pragma once

#include "skelet/layout.hpp"

namespace skelet {

enum class AdjacencyNorm { kRow, kSymmetric };

/// Symmetric 0/1 matrix with zero diagonal built from the layout's edges.
Eigen::MatrixXd build_adjacency(const KeypointLayout& layout);

/// A + I. Requires a fresh adjacency (all-zero diagonal); applying it twice
/// is rejected with ConfigError.
Eigen::MatrixXd add_self_links(const Eigen::MatrixXd& a);

/// D^-1 A (rows sum to one) or D^-1/2 A D^-1/2. Throws LayoutError when a
/// row sums to zero.
Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a, AdjacencyNorm norm = AdjacencyNorm::kRow);

}  // namespace skelet
