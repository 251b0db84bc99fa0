#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "skelet/errors.hpp"

namespace skelet {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

/// Dense row-major tensor. Storage is an Eigen column vector, so any
/// contiguous reshape is a free Map over the same buffer.
template <typename Scalar>
class BasicTensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape) : shape_(std::move(shape)) {
    validate_shape();
    data_ = Vector::Zero(shape_size(shape_));
  }

  BasicTensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape();
    if (data_.size() != shape_size(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }

  static BasicTensor filled(Shape shape, Scalar value) {
    BasicTensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  static BasicTensor from_matrix(const RowMatrix<Scalar>& m) {
    BasicTensor t({m.rows(), m.cols()});
    t.as_matrix(m.rows(), m.cols()) = m;
    return t;
  }

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return shape_.empty(); }

  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }

  Vector& flat() noexcept { return data_; }
  const Vector& flat() const noexcept { return data_; }

  /// Row-major rows x cols view of the whole buffer.
  MatrixMap as_matrix(Index rows, Index cols) {
    check_view(rows, cols);
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap as_matrix(Index rows, Index cols) const {
    check_view(rows, cols);
    return ConstMatrixMap(data_.data(), rows, cols);
  }

  /// Leading axis against everything else: (dim0, size/dim0).
  MatrixMap leading_view() { return as_matrix(dim(0), size() / dim(0)); }
  ConstMatrixMap leading_view() const { return as_matrix(dim(0), size() / dim(0)); }

  /// Everything else against the trailing axis: (size/last, last).
  MatrixMap trailing_view() { return as_matrix(size() / shape_.back(), shape_.back()); }
  ConstMatrixMap trailing_view() const { return as_matrix(size() / shape_.back(), shape_.back()); }

  template <typename... Is>
  Scalar& operator()(Is... idx) {
    return data_[offset({static_cast<Index>(idx)...})];
  }
  template <typename... Is>
  const Scalar& operator()(Is... idx) const {
    return data_[offset({static_cast<Index>(idx)...})];
  }

  BasicTensor reshaped(Shape shape) const {
    if (shape_size(shape) != size()) {
      throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                           shape_string(shape));
    }
    return BasicTensor(std::move(shape), data_);
  }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void validate_shape() const {
    for (Index e : shape_) {
      if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_string(shape_));
    }
  }

  void check_view(Index rows, Index cols) const {
    if (rows * cols != size()) {
      throw DimensionError("cannot view " + shape_string(shape_) + " as " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  Index offset(std::initializer_list<Index> idx) const {
    if (idx.size() != shape_.size()) {
      throw IndexError("index rank " + std::to_string(idx.size()) + " vs tensor rank " +
                       std::to_string(shape_.size()));
    }
    Index off = 0;
    std::size_t axis = 0;
    for (Index i : idx) {
      if (i < 0 || i >= shape_[axis]) {
        throw IndexError("index " + std::to_string(i) + " out of range on axis " +
                         std::to_string(axis) + " of " + shape_string(shape_));
      }
      off = off * shape_[axis] + i;
      ++axis;
    }
    return off;
  }

  Shape shape_;
  Vector data_;
};

using Tensor = BasicTensor<double>;

}  // namespace skelet
