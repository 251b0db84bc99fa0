#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "skelet/tensor.hpp"

namespace skelet {

/// Multi-person keypoint sequence stored as (I, J, T, C). Channels are
/// (x, y) or (x, y, confidence).
struct SkeletonSequence {
  Tensor data;
  std::string layout_id = "custom";
  std::optional<std::int32_t> label;

  SkeletonSequence() = default;
  SkeletonSequence(Tensor d, std::string layout, std::optional<std::int32_t> lbl = std::nullopt);

  Index persons() const { return data.dim(0); }
  Index joints() const { return data.dim(1); }
  Index frames() const { return data.dim(2); }
  Index channels() const { return data.dim(3); }
  bool has_confidence() const { return channels() >= 3; }

  /// (J, T, C) slice for one person.
  Tensor person(Index i) const;

  /// Finite coordinates, confidences in [0, 1]; throws DimensionError /
  /// NumericError.
  void validate() const;
};

}  // namespace skelet
