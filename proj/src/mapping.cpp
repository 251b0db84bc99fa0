#include "skelet/mapping.hpp"

#include "skelet/kernels.hpp"

namespace skelet {

Eigen::MatrixXd MappingMatrix::dense() const {
  const Tensor& w = weights.value;
  if (kind == MappingKind::kReweight) return w.flat().asDiagonal();
  return w.as_matrix(w.dim(0), w.dim(1));
}

MappingMatrix init_downsample_matrix(const PartitionMap& partition) {
  partition.validate();
  Tensor w({partition.source_count, partition.target_count()});
  for (Index k = 0; k < partition.target_count(); ++k) {
    const auto& part = partition.parts[static_cast<std::size_t>(k)];
    const double share = 1.0 / static_cast<double>(part.size());
    for (Index j : part) w(j, k) = share;
  }
  return MappingMatrix{MappingKind::kDownsample, Parameter(std::move(w))};
}

MappingMatrix init_reweight_matrix(Index joints) {
  if (joints < 1) throw ConfigError("reweight matrix needs at least one joint");
  return MappingMatrix{MappingKind::kReweight, Parameter(Tensor::filled({joints}, 1.0))};
}

Tensor apply_mapping(const MappingMatrix& m, const Tensor& x) {
  if (x.rank() < 1 || x.dim(0) != m.source_joints()) {
    throw DimensionError("apply_mapping: mapping expects " + std::to_string(m.source_joints()) +
                         " joints, input is " + shape_string(x.shape()));
  }
  if (m.kind == MappingKind::kReweight) return kernels::scale_joints(m.weights.value, x);
  return kernels::contract_joints(m.weights.value, x);
}

Var apply_mapping(MappingKind kind, Var weights, Var x) {
  return kind == MappingKind::kReweight ? scale_joints(weights, x) : contract_joints(weights, x);
}

Eigen::MatrixXd transform_adjacency(const Eigen::MatrixXd& a, const MappingMatrix& m) {
  if (m.kind != MappingKind::kDownsample) {
    throw ConfigError("transform_adjacency requires a downsample mapping matrix");
  }
  if (a.rows() != a.cols() || a.rows() != m.source_joints()) {
    throw DimensionError("transform_adjacency: adjacency is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + ", mapping expects " +
                         std::to_string(m.source_joints()) + " joints");
  }
  const Eigen::MatrixXd md = m.dense();
  Eigen::MatrixXd out = md.transpose() * (a * md);
  // Symmetric input maps to a bit-exactly symmetric output.
  if (a == a.transpose()) out.triangularView<Eigen::StrictlyLower>() = out.transpose();
  return out;
}

}  // namespace skelet
