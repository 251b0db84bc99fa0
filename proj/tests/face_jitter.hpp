#pragma once

#include <vector>

#include "skelet/layout.hpp"
#include "skelet/sequence.hpp"

namespace fixtures {

using namespace skelet;

// Four videos of four frames. Body, feet and hands sit at the same place in
// every video (hands sway identically within each clip); the whole face is
// shifted by a different dyadic offset in each video and is static within
// it. All values are multiples of 1/8, so sums over the data are exact.
inline std::vector<SkeletonSequence> face_jitter_dataset(double offset = 0.0) {
  const auto& regions = wholebody_layout().regions;
  const double face_shift[4][2] = {{0.0, 0.0}, {0.5, -0.25}, {-0.75, 0.125}, {0.25, 0.625}};
  std::vector<SkeletonSequence> out;
  for (int s = 0; s < 4; ++s) {
    Tensor d({1, 133, 4, 3});
    for (Index j = 0; j < 133; ++j) {
      const Region r = regions[static_cast<std::size_t>(j)];
      for (Index t = 0; t < 4; ++t) {
        double x = 0.125 * static_cast<double>(j % 16);
        double y = 0.125 * static_cast<double>(j / 16);
        if (r == Region::kFace) {
          x += face_shift[s][0];
          y += face_shift[s][1];
        }
        if (r == Region::kLeftHand || r == Region::kRightHand) x += 0.25 * static_cast<double>(t % 2);
        d(0, j, t, 0) = x + offset;
        d(0, j, t, 1) = y + offset;
        d(0, j, t, 2) = 1.0;
      }
    }
    out.emplace_back(d, "wholebody");
  }
  return out;
}

}  // namespace fixtures
