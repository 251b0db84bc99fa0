#include "skelet/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace skelet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                   std::string(expected) + ")");
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  bad_value(key, value, "true/false");
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view value) {
  std::vector<T> out;
  for (auto item : split(value, ',')) out.push_back(parse_integer<T>(key, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = void (*)(RunConfig&, std::string_view, std::string_view);

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"seed", [](RunConfig& c, std::string_view k, std::string_view v) { c.seed = parse_integer<std::uint64_t>(k, v); }},
      {"skelet", [](RunConfig& c, std::string_view k, std::string_view v) { c.skelet = parse_bool(k, v); }},
      {"network.channels", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.channels = parse_list<Index>(k, v); }},
      {"network.downsample_blocks", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.downsample_blocks = parse_list<int>(k, v); }},
      {"network.joints", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.joints = parse_list<Index>(k, v); }},
      {"network.groups", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.groups = parse_list<Index>(k, v); }},
      {"network.group_expand", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.group_expand = parse_integer<Index>(k, v); }},
      {"network.temporal_kernel", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.temporal_kernel = parse_integer<Index>(k, v); }},
      {"network.in_channels", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.in_channels = parse_integer<Index>(k, v); }},
      {"network.num_classes", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.num_classes = parse_integer<Index>(k, v); }},
      {"network.frames", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.frames = parse_integer<Index>(k, v); }},
      {"network.order", [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "project-then-activate") c.network.order = ActivationOrder::kProjectThenActivate;
         else if (v == "activate-then-project") c.network.order = ActivationOrder::kActivateThenProject;
         else bad_value(k, v, "project-then-activate or activate-then-project");
       }},
      {"network.adjacency_norm", [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "row") c.network.adjacency_norm = AdjacencyNorm::kRow;
         else if (v == "symmetric") c.network.adjacency_norm = AdjacencyNorm::kSymmetric;
         else bad_value(k, v, "row or symmetric");
       }},
      {"train.learning_rate", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.learning_rate = parse_double(k, v); }},
      {"train.momentum", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.momentum = parse_double(k, v); }},
      {"train.nesterov", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.nesterov = parse_bool(k, v); }},
      {"train.weight_decay", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.weight_decay = parse_double(k, v); }},
      {"train.epochs", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.epochs = parse_integer<int>(k, v); }},
      {"train.batch_size", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.batch_size = parse_integer<int>(k, v); }},
      {"train.cosine", [](RunConfig& c, std::string_view k, std::string_view v) { c.train.cosine = parse_bool(k, v); }},
      {"ip.max_persons", [](RunConfig& c, std::string_view k, std::string_view v) { c.ip.max_persons = parse_integer<Index>(k, v); }},
      {"ip.channels", [](RunConfig& c, std::string_view k, std::string_view v) { c.ip.channels = parse_integer<Index>(k, v); }},
      {"ip.crop_overflow", [](RunConfig& c, std::string_view k, std::string_view v) { c.ip.crop_overflow = parse_bool(k, v); }},
      {"selection.drop_ranges", [](RunConfig& c, std::string_view k, std::string_view v) {
         std::vector<IndexRange> ranges;
         for (auto item : split(v, ',')) {
           const auto dash = item.find('-');
           if (dash == std::string_view::npos) bad_value(k, v, "comma-separated first-last ranges");
           ranges.push_back({parse_integer<Index>(k, trim(item.substr(0, dash))),
                             parse_integer<Index>(k, trim(item.substr(dash + 1)))});
         }
         c.selection.drop_ranges = std::move(ranges);
       }},
      {"selection.eps_body", [](RunConfig& c, std::string_view k, std::string_view v) { c.selection.eps_body = parse_double(k, v); }},
      {"selection.eps_face", [](RunConfig& c, std::string_view k, std::string_view v) { c.selection.eps_face = parse_double(k, v); }},
      {"selection.eps_hand", [](RunConfig& c, std::string_view k, std::string_view v) { c.selection.eps_hand = parse_double(k, v); }},
      {"selection.eps_foot", [](RunConfig& c, std::string_view k, std::string_view v) { c.selection.eps_foot = parse_double(k, v); }},
      {"selection.epsilon_mode", [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "region") c.selection.epsilon_mode = EpsilonMode::kRegionConstant;
         else if (v == "box") c.selection.epsilon_mode = EpsilonMode::kBoxScaled;
         else bad_value(k, v, "region or box");
       }},
      {"selection.flag_video_percentile", [](RunConfig& c, std::string_view k, std::string_view v) { c.selection.flag_video_percentile = parse_double(k, v); }},
      {"selection.flag_motion_percentile", [](RunConfig& c, std::string_view k, std::string_view v) { c.selection.flag_motion_percentile = parse_double(k, v); }},
      {"paths.edges", [](RunConfig& c, std::string_view, std::string_view v) { c.edges_path = std::string(v); }},
      {"paths.partitions", [](RunConfig& c, std::string_view, std::string_view v) {
         c.partition_paths.clear();
         for (auto item : split(v, ',')) c.partition_paths.emplace_back(item);
       }},
      {"paths.data_dir", [](RunConfig& c, std::string_view, std::string_view v) { c.data_dir = std::string(v); }},
      {"profile.two_flops_per_mac", [](RunConfig& c, std::string_view k, std::string_view v) { c.two_flops_per_mac = parse_bool(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  try {
    network.validate();
    train.validate();
    ip.validate();
    selection.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("config rejected: ") + e.what());
  }
  if (!partition_paths.empty() &&
      static_cast<Index>(partition_paths.size()) != network.stage_count() - 1) {
    throw UsageError("paths.partitions lists " + std::to_string(partition_paths.size()) +
                     " tables, the schedule has " + std::to_string(network.stage_count() - 1) + " downsamples");
  }
}

RunConfig preset_config(std::string_view name) {
  RunConfig cfg;
  if (name == "default") return cfg;
  if (name == "toy") {
    cfg.preset = "toy";
    cfg.network = toy_network_config(12, 16, 4);
    cfg.train.learning_rate = 0.005;
    cfg.train.batch_size = 4;
    cfg.train.epochs = 200;
    cfg.train.weight_decay = 0.0;
    cfg.ip.joints = 12;
    return cfg;
  }
  throw UsageError("unknown preset '" + std::string(name) + "' (expected default or toy)");
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw UsageError("unknown config key '" + std::string(key) + "'");
  it->second(cfg, key, trim(value));
  cfg.ip.in_channels = cfg.network.in_channels;
  if (!cfg.network.joints.empty()) cfg.ip.joints = cfg.network.joints.front();
}

RunConfig parse_run_config(std::string_view text, const RunConfig& base) {
  RunConfig cfg = base;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_setting = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "preset") {
        if (seen_setting) throw UsageError("preset must precede every other setting");
        cfg = preset_config(value);
      } else {
        apply_setting(cfg, key, value);
      }
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(line_no) + ": " + e.what());
    }
    seen_setting = true;
  }
  cfg.validate();
  return cfg;
}

RunConfig read_run_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), base);
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream os;
  os << "preset = " << c.preset << '\n';
  if (c.seed) os << "seed = " << *c.seed << '\n';
  os << "skelet = " << (c.skelet ? "true" : "false") << '\n';
  os << "network.channels = " << join(c.network.channels) << '\n';
  os << "network.downsample_blocks = " << join(c.network.downsample_blocks) << '\n';
  os << "network.joints = " << join(c.network.joints) << '\n';
  os << "network.groups = " << join(c.network.groups) << '\n';
  os << "network.group_expand = " << c.network.group_expand << '\n';
  os << "network.temporal_kernel = " << c.network.temporal_kernel << '\n';
  os << "network.in_channels = " << c.network.in_channels << '\n';
  os << "network.num_classes = " << c.network.num_classes << '\n';
  os << "network.frames = " << c.network.frames << '\n';
  os << "network.order = "
     << (c.network.order == ActivationOrder::kProjectThenActivate ? "project-then-activate" : "activate-then-project")
     << '\n';
  os << "network.adjacency_norm = " << (c.network.adjacency_norm == AdjacencyNorm::kRow ? "row" : "symmetric") << '\n';
  os << "train.learning_rate = " << format_double(c.train.learning_rate) << '\n';
  os << "train.momentum = " << format_double(c.train.momentum) << '\n';
  os << "train.nesterov = " << (c.train.nesterov ? "true" : "false") << '\n';
  os << "train.weight_decay = " << format_double(c.train.weight_decay) << '\n';
  os << "train.epochs = " << c.train.epochs << '\n';
  os << "train.batch_size = " << c.train.batch_size << '\n';
  os << "train.cosine = " << (c.train.cosine ? "true" : "false") << '\n';
  os << "ip.max_persons = " << c.ip.max_persons << '\n';
  os << "ip.channels = " << c.ip.channels << '\n';
  os << "ip.crop_overflow = " << (c.ip.crop_overflow ? "true" : "false") << '\n';
  os << "selection.drop_ranges = ";
  for (std::size_t i = 0; i < c.selection.drop_ranges.size(); ++i) {
    os << (i ? "," : "") << c.selection.drop_ranges[i].first << '-' << c.selection.drop_ranges[i].last;
  }
  os << '\n';
  os << "selection.eps_body = " << format_double(c.selection.eps_body) << '\n';
  os << "selection.eps_face = " << format_double(c.selection.eps_face) << '\n';
  os << "selection.eps_hand = " << format_double(c.selection.eps_hand) << '\n';
  os << "selection.eps_foot = " << format_double(c.selection.eps_foot) << '\n';
  os << "selection.epsilon_mode = " << (c.selection.epsilon_mode == EpsilonMode::kRegionConstant ? "region" : "box")
     << '\n';
  os << "selection.flag_video_percentile = " << format_double(c.selection.flag_video_percentile) << '\n';
  os << "selection.flag_motion_percentile = " << format_double(c.selection.flag_motion_percentile) << '\n';
  os << "paths.edges = " << c.edges_path << '\n';
  os << "paths.partitions = " << join(c.partition_paths) << '\n';
  os << "paths.data_dir = " << c.data_dir << '\n';
  os << "profile.two_flops_per_mac = " << (c.two_flops_per_mac ? "true" : "false") << '\n';
  return os.str();
}

void apply_env_overrides(RunConfig& cfg, const EnvLookup& lookup) {
  if (auto v = lookup("SKELET_EDGES")) apply_setting(cfg, "paths.edges", *v);
  if (auto v = lookup("SKELET_PARTITIONS")) apply_setting(cfg, "paths.partitions", *v);
  if (auto v = lookup("SKELET_DATA_DIR")) apply_setting(cfg, "paths.data_dir", *v);
}

void apply_env_overrides(RunConfig& cfg) {
  apply_env_overrides(cfg, [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  });
}

ResolvedModel resolve_model(const RunConfig& cfg) {
  cfg.validate();
  const NetworkConfig& net = cfg.network;
  const Index j0 = net.joints.front();
  ResolvedModel out;
  if (j0 == kExpressiveCount) {
    out.layout = expressive_layout();
  } else if (j0 == kWholeBodyCount) {
    out.layout = wholebody_layout();
  } else {
    out.layout = chain_layout(j0);
  }
  if (!cfg.edges_path.empty()) {
    out.layout.edges = read_edge_table(cfg.edges_path);
    out.layout.validate();
  }
  const bool shipped = net.joints == std::vector<Index>{65, 27, 11};
  for (Index s = 0; s + 1 < net.stage_count(); ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (!cfg.partition_paths.empty()) {
      out.partitions.push_back(read_partition_table(cfg.partition_paths[us], net.joints[us]));
    } else if (shipped) {
      out.partitions.push_back(s == 0 ? expressive_to_27() : stage27_to_11());
    } else {
      const Index width = (net.joints[us] + net.joints[us + 1] - 1) / net.joints[us + 1];
      out.partitions.push_back(contiguous_partition(net.joints[us], width));
    }
  }
  return out;
}

}  // namespace skelet
