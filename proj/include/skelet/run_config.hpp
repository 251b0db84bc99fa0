#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skelet/instance_pooling.hpp"
#include "skelet/network.hpp"
#include "skelet/partition.hpp"
#include "skelet/selection.hpp"
#include "skelet/train.hpp"

namespace skelet {

/// Everything a CLI run needs. Text form is one `key = value` per line with
/// `#` comments; see docs/formats.md for the key list.
struct RunConfig {
  std::string preset = "default";
  NetworkConfig network;
  bool skelet = true;
  TrainConfig train;
  IPConfig ip;
  SelectionConfig selection;
  std::string edges_path;
  std::vector<std::string> partition_paths;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  bool two_flops_per_mac = false;

  /// Cross-field checks; throws UsageError.
  void validate() const;
};

/// "default" (65 joints, T = 100, 10 blocks) or "toy" (12 joints, T = 16,
/// 3 blocks, 4 classes). Throws UsageError for other names.
RunConfig preset_config(std::string_view name);

/// Applies one setting. Unknown keys and malformed values throw UsageError.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses a config text. A `preset` line, if present, must come first and
/// replaces `base`.
RunConfig parse_run_config(std::string_view text, const RunConfig& base = preset_config("default"));
RunConfig read_run_config(const std::string& path, const RunConfig& base = preset_config("default"));

/// Canonical text rendering; parse_run_config(format_run_config(c)) == c.
std::string format_run_config(const RunConfig& cfg);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Path overrides from SKELET_EDGES, SKELET_PARTITIONS (comma separated) and
/// SKELET_DATA_DIR. No other setting can come from the environment.
void apply_env_overrides(RunConfig& cfg, const EnvLookup& lookup);
void apply_env_overrides(RunConfig& cfg);

/// Layout and partition chain the config describes: explicit table paths
/// win, then the built-in expressive tables for a 65/27/11 schedule, then a
/// chain layout with contiguous partitions.
struct ResolvedModel {
  KeypointLayout layout;
  std::vector<PartitionMap> partitions;
};
ResolvedModel resolve_model(const RunConfig& cfg);

}  // namespace skelet
