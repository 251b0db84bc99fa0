#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skelet/instance_pooling.hpp"
#include "skelet/network.hpp"

namespace skelet {

/// Closed-form cost of one block or head. `macs` counts multiply-accumulates
/// of weight applications, mapping contractions, adjacency contractions and
/// temporal taps; `aux` counts elementwise work (activations, scale/bias,
/// residual adds, pooling) and is kept out of the headline total.
struct CostRow {
  std::string name;
  std::string kind;
  Index joints_in = 0;
  Index joints_out = 0;
  Index frames_in = 0;
  Index frames_out = 0;
  Index in_channels = 0;
  Index out_channels = 0;
  Index groups = 1;
  std::uint64_t macs = 0;
  std::uint64_t aux = 0;
  std::uint64_t params = 0;
};

struct CostReport {
  std::string label;
  std::vector<CostRow> rows;
  std::uint64_t total_macs = 0;
  std::uint64_t total_aux = 0;
  std::uint64_t total_params = 0;
  /// Report FLOPs as 2 per MAC instead of 1.
  bool two_flops_per_mac = false;

  std::uint64_t flops() const { return two_flops_per_mac ? 2 * total_macs : total_macs; }
  void add(CostRow row);
};

struct InputDims {
  Index joints = 0;
  Index frames = 0;
  Index channels = 0;
};

/// J * T * Cin * Cout.
std::uint64_t pointwise_macs(Index joints, Index frames, Index in_channels, Index out_channels);

/// Closed-form cost of one block fed `frames_in` frames.
CostRow block_cost(const BlockConfig& cfg, Index frames_in);

/// Per-block rows plus the classifier head for a single-person forward.
CostReport count_flops(const Network& net, InputDims dims);
CostReport count_flops(const Network& net);

/// Same rows as count_flops; headline figure is the learnable scalar count.
CostReport count_params(const Network& net);

/// Embedding and concat-pool rows (scaling with `persons`), the group-pool
/// row, and the downstream network rows, which do not depend on `persons`.
CostReport count_ip_flops(const IPConfig& cfg, Index persons, Index joints, Index frames, Index in_channels,
                          const Network& downstream);

/// Cost of running `downstream` once per person without early fusion.
CostReport count_without_ip(const Network& downstream, Index persons, InputDims dims);

/// Aligned human-readable table.
std::string format_cost_table(const CostReport& report);

/// One JSON object per row, then a totals record.
std::string format_cost_records(const CostReport& report);

}  // namespace skelet
