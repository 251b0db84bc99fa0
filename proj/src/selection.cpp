#include "skelet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace skelet {

double SelectionConfig::epsilon(Region region) const {
  switch (region) {
    case Region::kBody: return eps_body;
    case Region::kFace: return eps_face;
    case Region::kLeftHand:
    case Region::kRightHand: return eps_hand;
    case Region::kLeftFoot:
    case Region::kRightFoot: return eps_foot;
  }
  return eps_body;
}

void SelectionConfig::validate() const {
  for (const auto& r : drop_ranges) {
    if (r.first < 0 || r.last >= kWholeBodyCount || r.first > r.last) {
      throw ConfigError("drop range [" + std::to_string(r.first) + ", " + std::to_string(r.last) +
                        "] outside [0, 132]");
    }
  }
  for (double e : {eps_body, eps_face, eps_hand, eps_foot}) {
    if (!(e > 0.0)) throw ConfigError("area scale coefficients must be positive");
  }
  for (double p : {flag_video_percentile, flag_motion_percentile}) {
    if (p < 0.0 || p > 100.0) throw ConfigError("percentile thresholds must lie in [0, 100]");
  }
}

namespace {

bool frame_valid(const Tensor& person, Index j, Index t) {
  return person.dim(2) < 3 || person(j, t, Index{2}) > 0.0;
}

void check_common_layout(std::span<const SkeletonSequence> dataset) {
  for (const auto& seq : dataset) {
    if (seq.joints() != dataset.front().joints()) {
      throw DimensionError("dataset mixes joint counts " + std::to_string(seq.joints()) + " and " +
                           std::to_string(dataset.front().joints()));
    }
  }
}

// Mean diagonal of the person's bounding box over frames with any valid point.
double mean_box_diagonal(const Tensor& person) {
  double total = 0.0;
  Index counted = 0;
  for (Index t = 0; t < person.dim(1); ++t) {
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    bool any = false;
    for (Index j = 0; j < person.dim(0); ++j) {
      if (!frame_valid(person, j, t)) continue;
      any = true;
      x0 = std::min(x0, person(j, t, Index{0}));
      x1 = std::max(x1, person(j, t, Index{0}));
      y0 = std::min(y0, person(j, t, Index{1}));
      y1 = std::max(y1, person(j, t, Index{1}));
    }
    if (any) {
      total += std::hypot(x1 - x0, y1 - y0);
      ++counted;
    }
  }
  const double diag = counted ? total / static_cast<double>(counted) : 0.0;
  return diag > 0.0 ? diag : 1.0;
}

}  // namespace

std::vector<double> video_variance(std::span<const SkeletonSequence> dataset) {
  if (dataset.size() < 2) {
    throw InsufficientDataError("video variance needs at least 2 videos, got " +
                                std::to_string(dataset.size()));
  }
  check_common_layout(dataset);
  const Index joints = dataset.front().joints();
  std::vector<double> result(static_cast<std::size_t>(joints), 0.0);

  std::vector<Tensor> persons;
  for (const auto& seq : dataset) persons.push_back(seq.person(0));

  for (Index j = 0; j < joints; ++j) {
    // Positions are taken relative to the first valid observation so a
    // global offset cancels before any averaging.
    bool have_ref = false;
    double rx = 0.0, ry = 0.0;
    std::vector<Eigen::Vector2d> means;
    for (const Tensor& p : persons) {
      Eigen::Vector2d sum = Eigen::Vector2d::Zero();
      Index n = 0;
      for (Index t = 0; t < p.dim(1); ++t) {
        if (!frame_valid(p, j, t)) continue;
        if (!have_ref) {
          rx = p(j, t, Index{0});
          ry = p(j, t, Index{1});
          have_ref = true;
        }
        sum += Eigen::Vector2d(p(j, t, Index{0}) - rx, p(j, t, Index{1}) - ry);
        ++n;
      }
      if (n > 0) means.push_back(sum / static_cast<double>(n));
    }
    if (means.empty()) continue;
    Eigen::Vector2d mu = Eigen::Vector2d::Zero();
    for (const auto& m : means) mu += m;
    mu /= static_cast<double>(means.size());
    double acc = 0.0;
    for (const auto& m : means) acc += (m - mu).squaredNorm();
    result[static_cast<std::size_t>(j)] = acc / static_cast<double>(means.size());
  }
  return result;
}

std::vector<double> motion_variance(std::span<const SkeletonSequence> dataset,
                                    const KeypointLayout& layout, const SelectionConfig& config) {
  config.validate();
  if (dataset.empty()) throw InsufficientDataError("motion variance needs at least one video");
  check_common_layout(dataset);
  const Index joints = dataset.front().joints();
  if (layout.count() != joints) {
    throw LayoutError("layout '" + layout.id + "' has " + std::to_string(layout.count()) +
                      " points, sequences have " + std::to_string(joints));
  }
  for (const auto& seq : dataset) {
    if (seq.frames() < 2) {
      throw InsufficientDataError("motion variance needs at least 2 frames per video, got " +
                                  std::to_string(seq.frames()));
    }
  }

  std::vector<Tensor> persons;
  std::vector<double> box_scale;
  for (const auto& seq : dataset) {
    persons.push_back(seq.person(0));
    box_scale.push_back(config.epsilon_mode == EpsilonMode::kBoxScaled ? mean_box_diagonal(persons.back())
                                                                         : 1.0);
  }

  std::vector<double> result(static_cast<std::size_t>(joints), 0.0);
  for (Index j = 0; j < joints; ++j) {
    const double region_eps = config.epsilon(layout.regions[static_cast<std::size_t>(j)]);
    std::vector<double> per_video;
    for (std::size_t s = 0; s < persons.size(); ++s) {
      const Tensor& p = persons[s];
      double sum = 0.0;
      Index n = 0;
      for (Index t = 0; t + 1 < p.dim(1); ++t) {
        if (!frame_valid(p, j, t) || !frame_valid(p, j, t + 1)) continue;
        sum += std::hypot(p(j, t + 1, Index{0}) - p(j, t, Index{0}), p(j, t + 1, Index{1}) - p(j, t, Index{1}));
        ++n;
      }
      if (n == 0) continue;
      per_video.push_back(sum / static_cast<double>(n) / (region_eps * box_scale[s]));
    }
    if (per_video.empty()) continue;
    double mean = 0.0;
    for (double v : per_video) mean += v;
    mean /= static_cast<double>(per_video.size());
    double acc = 0.0;
    for (double v : per_video) acc += (v - mean) * (v - mean);
    result[static_cast<std::size_t>(j)] = std::sqrt(acc / static_cast<double>(per_video.size()));
  }
  return result;
}

KeypointStats compute_stats(std::span<const SkeletonSequence> dataset, const KeypointLayout& layout,
                            const SelectionConfig& config) {
  return {video_variance(dataset), motion_variance(dataset, layout, config)};
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw InsufficientDataError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<KeypointReportRow> rank_keypoints(const KeypointStats& stats, const KeypointLayout& layout,
                                              const SelectionConfig& config) {
  const std::size_t n = stats.video_variance.size();
  if (stats.motion_variance.size() != n || static_cast<Index>(n) != layout.count()) {
    throw DimensionError("statistics length does not match layout '" + layout.id + "'");
  }
  const double video_cut = percentile(stats.video_variance, config.flag_video_percentile);
  const double motion_cut = percentile(stats.motion_variance, config.flag_motion_percentile);

  std::vector<KeypointReportRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].index = static_cast<Index>(i);
    rows[i].name = layout.names[i];
    rows[i].region = layout.regions[i];
    rows[i].video_variance = stats.video_variance[i];
    rows[i].motion_variance = stats.motion_variance[i];
    rows[i].removal_candidate = stats.video_variance[i] >= video_cut && stats.motion_variance[i] <= motion_cut;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.video_variance != b.video_variance) return a.video_variance > b.video_variance;
    return a.motion_variance < b.motion_variance;
  });
  for (std::size_t i = 0; i < n; ++i) rows[i].rank = static_cast<Index>(i + 1);
  return rows;
}

std::string format_report_tsv(const std::vector<KeypointReportRow>& rows) {
  std::ostringstream os;
  os << "rank\tindex\tname\tregion\tvideo_variance\tmotion_variance\tremoval_candidate\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.rank << '\t' << r.index << '\t' << r.name << '\t' << region_name(r.region) << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", r.video_variance);
    os << buf << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", r.motion_variance);
    os << buf << '\t' << (r.removal_candidate ? 1 : 0) << '\n';
  }
  return os.str();
}

SelectionProtocol parse_protocol(std::string_view name) {
  if (name == "wholebody") return SelectionProtocol::kWholeBody;
  if (name == "wo-face") return SelectionProtocol::kWithoutFace;
  if (name == "wo-feet") return SelectionProtocol::kWithoutFeet;
  if (name == "simple-fingers") return SelectionProtocol::kSimpleFingers;
  if (name == "wo-hands") return SelectionProtocol::kWithoutHands;
  throw UsageError("unknown selection protocol '" + std::string(name) +
                   "' (wholebody, wo-face, wo-feet, simple-fingers, wo-hands)");
}

std::string_view protocol_name(SelectionProtocol protocol) {
  switch (protocol) {
    case SelectionProtocol::kWholeBody: return "wholebody";
    case SelectionProtocol::kWithoutFace: return "wo-face";
    case SelectionProtocol::kWithoutFeet: return "wo-feet";
    case SelectionProtocol::kSimpleFingers: return "simple-fingers";
    case SelectionProtocol::kWithoutHands: return "wo-hands";
  }
  return "unknown";
}

std::vector<Index> protocol_indices(SelectionProtocol protocol) {
  const auto& regions = wholebody_layout().regions;
  std::vector<Index> kept;
  for (Index i = 0; i < kWholeBodyCount; ++i) {
    const Region r = regions[static_cast<std::size_t>(i)];
    const bool hand = r == Region::kLeftHand || r == Region::kRightHand;
    const bool foot = r == Region::kLeftFoot || r == Region::kRightFoot;
    bool keep = r != Region::kFace;
    switch (protocol) {
      case SelectionProtocol::kWholeBody: keep = true; break;
      case SelectionProtocol::kWithoutFace: break;
      case SelectionProtocol::kWithoutFeet: keep = keep && !foot; break;
      case SelectionProtocol::kWithoutHands: keep = keep && !hand; break;
      case SelectionProtocol::kSimpleFingers:
        if (hand) {
          // Hand blocks are root followed by five fingers of four points;
          // keep the root and each fingertip.
          const Index local = (i - 91) % 21;
          keep = local == 0 || local % 4 == 0;
        }
        break;
    }
    if (keep) kept.push_back(i);
  }
  return kept;
}

std::vector<Index> kept_indices(const SelectionConfig& config) {
  config.validate();
  std::vector<Index> kept;
  for (Index i = 0; i < kWholeBodyCount; ++i) {
    const bool dropped = std::any_of(config.drop_ranges.begin(), config.drop_ranges.end(),
                                     [i](const IndexRange& r) { return i >= r.first && i <= r.last; });
    if (!dropped) kept.push_back(i);
  }
  return kept;
}

SkeletonSequence select_keypoints(const SkeletonSequence& seq, const std::vector<Index>& kept) {
  if (seq.joints() != kWholeBodyCount) {
    throw LayoutError("keypoint selection expects 133 whole-body joints, got " +
                      std::to_string(seq.joints()));
  }
  const Index persons = seq.persons(), frames = seq.frames(), channels = seq.channels();
  const Index out_joints = static_cast<Index>(kept.size());
  Tensor out({persons, out_joints, frames, channels});
  const Index block = frames * channels;
  for (Index i = 0; i < persons; ++i) {
    for (Index k = 0; k < out_joints; ++k) {
      out.flat().segment((i * out_joints + k) * block, block) =
          seq.data.flat().segment((i * kWholeBodyCount + kept[static_cast<std::size_t>(k)]) * block, block);
    }
  }
  const std::string layout = out_joints == kExpressiveCount && kept == protocol_indices(SelectionProtocol::kWithoutFace)
                                 ? "expressive"
                             : out_joints == kWholeBodyCount ? "wholebody"
                                                             : "custom";
  return SkeletonSequence(std::move(out), layout, seq.label);
}

SkeletonSequence select_expressive(const SkeletonSequence& seq, const SelectionConfig& config) {
  return select_keypoints(seq, kept_indices(config));
}

SkeletonSequence pad_to_wholebody(const SkeletonSequence& seq, const SelectionConfig& config) {
  const std::vector<Index> kept = kept_indices(config);
  if (seq.joints() != static_cast<Index>(kept.size())) {
    throw LayoutError("padding expects " + std::to_string(kept.size()) + " joints, got " +
                      std::to_string(seq.joints()));
  }
  const Index persons = seq.persons(), frames = seq.frames(), channels = seq.channels();
  const Index block = frames * channels;
  Tensor out({persons, kWholeBodyCount, frames, channels});
  for (Index i = 0; i < persons; ++i) {
    for (std::size_t k = 0; k < kept.size(); ++k) {
      out.flat().segment((i * kWholeBodyCount + kept[k]) * block, block) =
          seq.data.flat().segment((i * seq.joints() + static_cast<Index>(k)) * block, block);
    }
  }
  return SkeletonSequence(std::move(out), "wholebody", seq.label);
}

}  // namespace skelet
