#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "face_jitter.hpp"
#include "skelet/selection.hpp"

using namespace skelet;
using fixtures::face_jitter_dataset;

namespace {

SkeletonSequence single_point_video(std::vector<std::pair<double, double>> track) {
  Tensor d({1, 1, static_cast<Index>(track.size()), 3});
  for (std::size_t t = 0; t < track.size(); ++t) {
    d(0, 0, static_cast<Index>(t), 0) = track[t].first;
    d(0, 0, static_cast<Index>(t), 1) = track[t].second;
    d(0, 0, static_cast<Index>(t), 2) = 1.0;
  }
  return SkeletonSequence(d, "custom");
}

}  // namespace

TEST(VideoVariance, IdenticalVideosGiveZero) {
  auto ds = face_jitter_dataset();
  std::vector<SkeletonSequence> same{ds[0], ds[0], ds[0]};
  for (double v : video_variance(same)) EXPECT_EQ(v, 0.0);
}

TEST(VideoVariance, TwoPointHandArithmetic) {
  std::vector<SkeletonSequence> ds{single_point_video({{0, 0}, {0, 0}}), single_point_video({{2, 0}, {2, 0}})};
  EXPECT_EQ(video_variance(ds), std::vector<double>{1.0});
}

TEST(VideoVariance, SingleVideoIsInsufficientData) {
  std::vector<SkeletonSequence> ds{single_point_video({{0, 0}, {1, 1}})};
  EXPECT_THROW(video_variance(ds), InsufficientDataError);
}

TEST(VideoVariance, FaceJitterExceedsStaticBody) {
  const auto v = video_variance(face_jitter_dataset());
  const auto& regions = wholebody_layout().regions;
  double max_other = 0.0, min_face = 1e300;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (regions[j] == Region::kFace) min_face = std::min(min_face, v[j]);
    else max_other = std::max(max_other, v[j]);
  }
  EXPECT_GT(min_face, max_other);
}

TEST(VideoVariance, SkipsZeroConfidenceFrames) {
  SkeletonSequence a = single_point_video({{0, 0}, {100, 100}});
  a.data(0, 0, 1, 2) = 0.0;
  SkeletonSequence b = single_point_video({{2, 0}, {2, 0}});
  std::vector<SkeletonSequence> ds{a, b};
  EXPECT_EQ(video_variance(ds), std::vector<double>{1.0});
}

TEST(MotionVariance, StaticKeypointsGiveZero) {
  std::vector<SkeletonSequence> ds{single_point_video({{1, 1}, {1, 1}}), single_point_video({{3, 2}, {3, 2}})};
  EXPECT_EQ(motion_variance(ds, chain_layout(1), {}), std::vector<double>{0.0});
}

TEST(MotionVariance, OneVersusThreeUnitsPerFrame) {
  std::vector<SkeletonSequence> ds{single_point_video({{0, 0}, {1, 0}, {2, 0}}),
                                   single_point_video({{0, 0}, {0, 3}, {0, 6}})};
  EXPECT_EQ(motion_variance(ds, chain_layout(1), {}), std::vector<double>{1.0});
}

TEST(MotionVariance, ShortVideoIsInsufficientData) {
  std::vector<SkeletonSequence> ds{single_point_video({{0, 0}}), single_point_video({{0, 0}, {1, 0}})};
  EXPECT_THROW(motion_variance(ds, chain_layout(1), {}), InsufficientDataError);
}

TEST(MotionVariance, EpsilonHomogeneity) {
  const auto ds = face_jitter_dataset();
  SelectionConfig base;
  const auto m = motion_variance(ds, wholebody_layout(), base);
  SelectionConfig doubled = base;
  doubled.eps_body *= 2.0;
  doubled.eps_face *= 2.0;
  doubled.eps_hand *= 2.0;
  doubled.eps_foot *= 2.0;
  const auto m2 = motion_variance(ds, wholebody_layout(), doubled);
  for (std::size_t j = 0; j < m.size(); ++j) EXPECT_EQ(m2[j], m[j] / 2.0);

  // A non-dyadic factor still scales to rounding accuracy.
  SelectionConfig tripled = base;
  tripled.eps_hand *= 3.0;
  const auto m3 = motion_variance(ds, wholebody_layout(), tripled);
  for (std::size_t j = 91; j < 133; ++j) EXPECT_NEAR(m3[j], m[j] / 3.0, 1e-15 * (1.0 + m[j]));
}

TEST(Statistics, ExactlyTranslationInvariant) {
  const auto ds = face_jitter_dataset();
  const auto shifted = face_jitter_dataset(3.25);
  EXPECT_EQ(video_variance(shifted), video_variance(ds));
  EXPECT_EQ(motion_variance(shifted, wholebody_layout(), {}), motion_variance(ds, wholebody_layout(), {}));
}

TEST(Statistics, PermutationInvariantOverVideos) {
  auto ds = face_jitter_dataset();
  const auto v = video_variance(ds);
  const auto m = motion_variance(ds, wholebody_layout(), {});
  std::reverse(ds.begin(), ds.end());
  const auto v2 = video_variance(ds);
  const auto m2 = motion_variance(ds, wholebody_layout(), {});
  for (std::size_t j = 0; j < v.size(); ++j) {
    EXPECT_NEAR(v2[j], v[j], 1e-15);
    EXPECT_NEAR(m2[j], m[j], 1e-15);
  }
}

TEST(RankKeypoints, FaceIndicesFillTheTopRemovalCandidates) {
  const auto ds = face_jitter_dataset();
  const auto rows = rank_keypoints(compute_stats(ds, wholebody_layout(), {}), wholebody_layout(), {});
  ASSERT_EQ(rows.size(), 133u);
  for (std::size_t r = 0; r < 68; ++r) {
    EXPECT_EQ(rows[r].region, Region::kFace) << "rank " << r + 1;
    EXPECT_TRUE(rows[r].removal_candidate);
  }
  for (std::size_t r = 68; r < rows.size(); ++r) EXPECT_FALSE(rows[r].removal_candidate);
}

TEST(RankKeypoints, AllEqualStatsKeepInputOrder) {
  KeypointStats stats{std::vector<double>(5, 1.0), std::vector<double>(5, 2.0)};
  const auto rows = rank_keypoints(stats, chain_layout(5), {});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].index, static_cast<Index>(i));
    EXPECT_EQ(rows[i].rank, static_cast<Index>(i + 1));
  }
}

TEST(RankKeypoints, TieOnVideoVarianceBreaksOnLowerMotion) {
  KeypointStats stats{{1.0, 1.0, 2.0}, {0.5, 0.1, 0.9}};
  const auto rows = rank_keypoints(stats, chain_layout(3), {});
  EXPECT_EQ(rows[0].index, 2);
  EXPECT_EQ(rows[1].index, 1);
  EXPECT_EQ(rows[2].index, 0);
}

TEST(RankKeypoints, TsvHasHeaderAndOneLinePerKeypoint) {
  KeypointStats stats{{0.25, 0.5}, {0.0, 1.0}};
  const std::string tsv = format_report_tsv(rank_keypoints(stats, chain_layout(2), {}));
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 3);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "rank\tindex\tname\tregion\tvideo_variance\tmotion_variance\tremoval_candidate");
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 50.0), 2.5);
  EXPECT_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 0.0), 1.0);
  EXPECT_EQ(percentile({4.0, 1.0, 3.0, 2.0}, 100.0), 4.0);
}

TEST(Protocols, KeypointCounts) {
  EXPECT_EQ(protocol_indices(SelectionProtocol::kWholeBody).size(), 133u);
  EXPECT_EQ(protocol_indices(SelectionProtocol::kWithoutFace).size(), 65u);
  EXPECT_EQ(protocol_indices(SelectionProtocol::kWithoutFeet).size(), 59u);
  EXPECT_EQ(protocol_indices(SelectionProtocol::kSimpleFingers).size(), 35u);
  EXPECT_EQ(protocol_indices(SelectionProtocol::kWithoutHands).size(), 23u);
  EXPECT_THROW(parse_protocol("no-such"), UsageError);
  for (auto p : {SelectionProtocol::kWholeBody, SelectionProtocol::kWithoutFace, SelectionProtocol::kWithoutFeet,
                 SelectionProtocol::kSimpleFingers, SelectionProtocol::kWithoutHands}) {
    EXPECT_EQ(parse_protocol(protocol_name(p)), p);
  }
}

TEST(SelectExpressive, KeepsOrderAndRemapsHands) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor d({2, 133, 3, 3});
  for (Index i = 0; i < d.size(); ++i) d.flat()[i] = u(rng);
  const SkeletonSequence seq(d, "wholebody", 7);
  const SkeletonSequence out = select_expressive(seq);
  ASSERT_EQ(out.joints(), 65);
  EXPECT_EQ(out.layout_id, "expressive");
  EXPECT_EQ(out.label, std::optional<std::int32_t>(7));
  for (Index p = 0; p < 2; ++p)
    for (Index t = 0; t < 3; ++t)
      for (Index c = 0; c < 3; ++c) {
        for (Index j = 0; j < 23; ++j) EXPECT_EQ(out.data(p, j, t, c), d(p, j, t, c));
        for (Index j = 91; j < 133; ++j) EXPECT_EQ(out.data(p, j - 68, t, c), d(p, j, t, c));
      }
}

TEST(SelectExpressive, WrongJointCountIsLayoutError) {
  EXPECT_THROW(select_expressive(SkeletonSequence(Tensor({1, 65, 2, 3}), "expressive")), LayoutError);
}

TEST(SelectExpressive, PaddingRestoresShapeWithZeroFace) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Tensor d({1, 133, 2, 3});
  for (Index i = 0; i < d.size(); ++i) d.flat()[i] = u(rng);
  const SkeletonSequence back = pad_to_wholebody(select_expressive(SkeletonSequence(d, "wholebody")));
  ASSERT_EQ(back.joints(), 133);
  for (Index j = 0; j < 133; ++j)
    for (Index t = 0; t < 2; ++t)
      for (Index c = 0; c < 3; ++c) {
        if (j >= 23 && j <= 90) EXPECT_EQ(back.data(0, j, t, c), 0.0);
        else EXPECT_EQ(back.data(0, j, t, c), d(0, j, t, c));
      }
}

TEST(SelectionConfig, RejectsBadRangesAndEpsilons) {
  SelectionConfig c;
  c.drop_ranges = {{10, 140}};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.eps_face = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
