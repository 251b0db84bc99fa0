#include "skelet/adjacency.hpp"

namespace skelet {

Eigen::MatrixXd build_adjacency(const KeypointLayout& layout) {
  layout.validate();
  const Index n = layout.count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : layout.edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

Eigen::MatrixXd add_self_links(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("add_self_links: adjacency must be square");
  if (!a.diagonal().isZero(0.0)) {
    throw ConfigError("add_self_links: adjacency already has a non-zero diagonal");
  }
  return a + Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a, AdjacencyNorm norm) {
  if (a.rows() != a.cols()) throw DimensionError("normalize_adjacency: adjacency must be square");
  const Eigen::VectorXd degree = a.rowwise().sum();
  for (Index i = 0; i < degree.size(); ++i) {
    if (!(degree[i] > 0.0)) {
      throw LayoutError("normalize_adjacency: joint " + std::to_string(i) + " is isolated");
    }
  }
  if (norm == AdjacencyNorm::kRow) return degree.cwiseInverse().asDiagonal() * a;
  const Eigen::VectorXd s = degree.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * a * s.asDiagonal();
}

}  // namespace skelet
