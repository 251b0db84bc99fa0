#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skelet/tensor.hpp"

namespace skelet {

/// Assignment of source joints to target parts. parts[k] lists the source
/// joints fused into target joint k.
struct PartitionMap {
  Index source_count = 0;
  std::vector<std::vector<Index>> parts;

  Index target_count() const { return static_cast<Index>(parts.size()); }

  /// Disjoint, non-empty parts whose union is [0, source_count). Throws
  /// PartitionError otherwise.
  void validate() const;

  /// Target part of every source joint.
  std::vector<Index> owner() const;
};

/// Expressive 65 -> 27: body and feet grouped by limb segment, each finger
/// collapsed to one point.
const PartitionMap& expressive_to_27();

/// 27 -> 11: head, arms, two halves per hand, hips, legs.
const PartitionMap& stage27_to_11();

/// Every joint in its own part.
PartitionMap singleton_partition(Index joints);

/// Consecutive runs of `width` joints (the last run may be shorter).
PartitionMap contiguous_partition(Index joints, Index width);

/// Partition table: one line per target part, `k: j1 j2 ...`, with k
/// running 0, 1, 2, ... in order. `#` starts a comment. A non-positive
/// source_count is inferred as the largest listed joint plus one.
PartitionMap parse_partition_table(std::string_view text, Index source_count);
PartitionMap read_partition_table(const std::filesystem::path& path, Index source_count);
std::string format_partition_table(const PartitionMap& p);

}  // namespace skelet
