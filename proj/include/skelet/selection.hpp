#pragma once

#include <span>
#include <string>
#include <vector>

#include "skelet/layout.hpp"
#include "skelet/sequence.hpp"

namespace skelet {

/// Inclusive range of keypoint indices.
struct IndexRange {
  Index first = 0;
  Index last = 0;
};

/// How the per-keypoint area scale in the motion statistic is obtained.
enum class EpsilonMode {
  kRegionConstant,  // constant per region
  kBoxScaled,       // region constant times the person's mean box diagonal in that video
};

struct SelectionConfig {
  std::vector<IndexRange> drop_ranges{{23, 90}};
  double eps_body = 1.0;
  double eps_face = 0.2;
  double eps_hand = 0.15;
  double eps_foot = 0.15;
  EpsilonMode epsilon_mode = EpsilonMode::kRegionConstant;
  /// A keypoint is flagged when its video variance is at or above this
  /// percentile and its motion variance at or below the other.
  double flag_video_percentile = 50.0;
  double flag_motion_percentile = 50.0;

  double epsilon(Region region) const;
  void validate() const;
};

struct KeypointStats {
  std::vector<double> video_variance;
  std::vector<double> motion_variance;
};

/// Per keypoint: spread of per-video mean positions around their mean over
/// videos, summed over the x and y axes. Uses person 0 of each sequence;
/// frames with zero confidence are skipped.
std::vector<double> video_variance(std::span<const SkeletonSequence> dataset);

/// Per keypoint: population standard deviation across videos of the mean
/// per-frame displacement divided by the keypoint's area scale.
std::vector<double> motion_variance(std::span<const SkeletonSequence> dataset,
                                    const KeypointLayout& layout, const SelectionConfig& config);

KeypointStats compute_stats(std::span<const SkeletonSequence> dataset, const KeypointLayout& layout,
                            const SelectionConfig& config);

struct KeypointReportRow {
  Index rank = 0;
  Index index = 0;
  std::string name;
  Region region = Region::kBody;
  double video_variance = 0.0;
  double motion_variance = 0.0;
  bool removal_candidate = false;
};

/// Rows ordered by video variance descending then motion variance
/// ascending; ties keep index order.
std::vector<KeypointReportRow> rank_keypoints(const KeypointStats& stats, const KeypointLayout& layout,
                                              const SelectionConfig& config);

/// Tab-separated rendering with a header line.
std::string format_report_tsv(const std::vector<KeypointReportRow>& rows);

/// Linear-interpolated percentile (0..100) of unsorted values.
double percentile(std::vector<double> values, double pct);

/// Keypoint subsets over the 133-point whole-body layout.
enum class SelectionProtocol {
  kWholeBody,      // all 133
  kWithoutFace,    // 65, the expressive set
  kWithoutFeet,    // 59
  kSimpleFingers,  // 35, one point per finger
  kWithoutHands,   // 23
};

SelectionProtocol parse_protocol(std::string_view name);
std::string_view protocol_name(SelectionProtocol protocol);

/// Whole-body indices retained by a protocol, ascending.
std::vector<Index> protocol_indices(SelectionProtocol protocol);

/// Whole-body indices outside every drop range, ascending.
std::vector<Index> kept_indices(const SelectionConfig& config);

/// Keeps `kept` joints of a whole-body sequence in their original order.
SkeletonSequence select_keypoints(const SkeletonSequence& seq, const std::vector<Index>& kept);

/// 133 -> 65 by dropping the configured ranges (face 23-90 by default).
SkeletonSequence select_expressive(const SkeletonSequence& seq, const SelectionConfig& config = {});

/// Inverse bookkeeping: re-inserts zero joints at the dropped indices.
SkeletonSequence pad_to_wholebody(const SkeletonSequence& seq, const SelectionConfig& config = {});

}  // namespace skelet
