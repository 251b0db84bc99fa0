#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skelet/tensor.hpp"

namespace skelet {

enum class Region { kBody, kFace, kLeftHand, kRightHand, kLeftFoot, kRightFoot };

std::string_view region_name(Region r);

using Edge = std::pair<Index, Index>;

/// Named keypoint set with an undirected edge list and a region per point.
struct KeypointLayout {
  std::string id;
  std::vector<std::string> names;
  std::vector<Region> regions;
  std::vector<Edge> edges;

  Index count() const { return static_cast<Index>(names.size()); }

  /// Throws LayoutError on out-of-range, self, or duplicate edges, or when
  /// names and regions disagree in length.
  void validate() const;
};

inline constexpr Index kWholeBodyCount = 133;
inline constexpr Index kExpressiveCount = 65;

/// COCO-WholeBody 133-point layout: body 0-16, feet 17-22, face 23-90,
/// left hand 91-111, right hand 112-132. Edges form a spanning tree.
const KeypointLayout& wholebody_layout();

/// 65-point layout with the 68 face points removed; hands renumbered to 23-64.
const KeypointLayout& expressive_layout();

/// Chain of `joints` points, all in the body region. Used by toy configs.
KeypointLayout chain_layout(Index joints);

/// Sub-layout keeping `kept` (ascending original indices); edges with a
/// dropped endpoint are removed and the rest renumbered.
KeypointLayout restrict_layout(const KeypointLayout& layout, const std::vector<Index>& kept,
                               std::string id);

/// Edge table: one `i j` pair per line; `#` starts a comment.
std::vector<Edge> read_edge_table(const std::filesystem::path& path);
std::vector<Edge> parse_edge_table(std::string_view text);
std::string format_edge_table(const std::vector<Edge>& edges);

}  // namespace skelet
