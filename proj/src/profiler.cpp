#include "skelet/profiler.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "skelet/kernels.hpp"

namespace skelet {

namespace {

using U64 = std::uint64_t;

U64 u(Index v) { return static_cast<U64>(v); }

std::string_view block_kind_name(const BlockConfig& cfg) {
  if (!cfg.use_mapping) return cfg.kind == BlockKind::kDownsample ? "plain-down" : "plain";
  return cfg.kind == BlockKind::kDownsample ? "downsample" : "normal";
}

}  // namespace

void CostReport::add(CostRow row) {
  total_macs += row.macs;
  total_aux += row.aux;
  total_params += row.params;
  rows.push_back(std::move(row));
}

U64 pointwise_macs(Index joints, Index frames, Index in_channels, Index out_channels) {
  return u(joints) * u(frames) * u(in_channels) * u(out_channels);
}

CostRow block_cost(const BlockConfig& cfg, Index frames_in) {
  cfg.validate();
  CostRow row;
  row.name = "block" + std::to_string(cfg.index);
  row.kind = block_kind_name(cfg);
  row.joints_in = cfg.joints;
  row.joints_out = cfg.output_joints();
  row.frames_in = frames_in;
  row.frames_out = kernels::strided_length(frames_in, cfg.temporal_stride);
  row.in_channels = cfg.in_channels;
  row.out_channels = cfg.out_channels;
  row.groups = cfg.groups;

  const U64 k = u(cfg.groups);
  const U64 win = u(cfg.in_channels) / k, wout = u(cfg.out_channels) / k;
  const U64 ji = u(cfg.joints), jo = u(row.joints_out);
  const U64 t = u(frames_in), tout = u(row.frames_out);
  const U64 cin = u(cfg.in_channels), cout = u(cfg.out_channels);
  const U64 taps = u(cfg.temporal_kernel);

  U64 macs = 0;
  U64 params = 0;
  if (cfg.use_mapping) {
    if (cfg.kind == BlockKind::kDownsample) {
      macs += k * ji * jo * t * win;
      params += k * ji * jo;
    } else {
      macs += k * ji * t * win;
      params += k * ji;
    }
  }
  macs += k * jo * jo * t * win;   // adjacency contraction
  macs += k * jo * t * win * wout; // per-group graph weights
  params += k * win * wout;
  macs += jo * t * cout * cout;    // shared channel map
  params += cout * cout;
  macs += jo * tout * taps * cout * cout;
  params += taps * cout * cout;
  params += 4 * cout;              // graph and temporal scale/bias
  if (cfg.has_residual_projection()) {
    macs += jo * tout * cin * cout;
    params += cin * cout;
  }
  row.macs = macs;
  row.params = params;
  // graph affine + relu at T, temporal affine + residual add at T'.
  row.aux = 2 * jo * t * cout + 2 * jo * tout * cout;
  return row;
}

namespace {

void add_network_rows(CostReport& report, const Network& net, InputDims dims, const std::string& prefix) {
  if (dims.joints != net.config.joints.front() || dims.channels != net.config.in_channels) {
    throw DimensionError("profiler input dims (" + std::to_string(dims.joints) + ", " +
                         std::to_string(dims.frames) + ", " + std::to_string(dims.channels) +
                         ") do not chain into the network's first block");
  }
  Index frames = dims.frames;
  Index joints = dims.joints;
  Index channels = dims.channels;
  for (const auto& b : net.blocks) {
    if (b.joints != joints || b.in_channels != channels) {
      throw DimensionError("block " + std::to_string(b.index) + " does not chain with its predecessor");
    }
    CostRow row = block_cost(b, frames);
    row.name = prefix + row.name;
    frames = row.frames_out;
    joints = row.joints_out;
    channels = row.out_channels;
    report.add(std::move(row));
  }
  CostRow head;
  head.name = prefix + "classifier";
  head.kind = "classifier";
  head.joints_in = joints;
  head.frames_in = frames;
  head.in_channels = channels;
  head.out_channels = net.config.num_classes;
  head.macs = u(channels) * u(net.config.num_classes);
  head.params = u(channels) * u(net.config.num_classes) + u(net.config.num_classes);
  head.aux = u(joints) * u(frames) * u(channels) + u(net.config.num_classes);  // pooling + bias
  report.add(std::move(head));
}

}  // namespace

CostReport count_flops(const Network& net, InputDims dims) {
  CostReport report;
  report.label = net.skelet ? "skelet" : "baseline";
  add_network_rows(report, net, dims, "");
  return report;
}

CostReport count_flops(const Network& net) {
  return count_flops(net, {net.config.joints.front(), net.config.frames, net.config.in_channels});
}

CostReport count_params(const Network& net) { return count_flops(net); }

CostReport count_ip_flops(const IPConfig& cfg, Index persons, Index joints, Index frames, Index in_channels,
                          const Network& downstream) {
  cfg.validate();
  if (persons < 1) throw ConfigError("person count must be positive");
  if (persons > cfg.max_persons && !cfg.crop_overflow) {
    throw DimensionError(std::to_string(persons) + " persons exceed the configured maximum");
  }
  if (joints != cfg.joints || in_channels != cfg.in_channels) {
    throw DimensionError("instance pooling input dims do not match its configuration");
  }
  const U64 slots = u(std::min(persons, cfg.max_persons));
  const U64 j = u(joints), t = u(frames), c = u(cfg.channels);
  CostReport report;
  report.label = "ip(" + std::to_string(persons) + ")";

  CostRow embed;
  embed.name = "ip.embed";
  embed.kind = "embed";
  embed.joints_in = embed.joints_out = joints;
  embed.frames_in = embed.frames_out = frames;
  embed.in_channels = in_channels;
  embed.out_channels = cfg.channels;
  embed.macs = slots * j * t * u(in_channels) * c;
  embed.params = u(in_channels) * c + c + j * c;
  embed.aux = 2 * slots * j * t * c;  // bias + encoding
  report.add(embed);

  CostRow concat;
  concat.name = "ip.concat_pool";
  concat.kind = "concat_pool";
  concat.joints_in = concat.joints_out = joints;
  concat.frames_in = concat.frames_out = frames;
  concat.in_channels = static_cast<Index>(slots) * cfg.channels;
  concat.out_channels = cfg.channels;
  concat.macs = j * t * slots * c * c;
  concat.params = slots * c * c + c;
  concat.aux = j * t * c + 2 * slots * j * t * c;  // bias, broadcast add, relu
  report.add(concat);

  CostRow group;
  group.name = "ip.group_pool";
  group.kind = "group_pool";
  group.joints_in = group.joints_out = joints;
  group.frames_in = group.frames_out = frames;
  group.in_channels = group.out_channels = cfg.channels;
  group.aux = slots * j * t * c;
  report.add(group);

  add_network_rows(report, downstream, {joints, frames, cfg.channels}, "net.");
  return report;
}

CostReport count_without_ip(const Network& downstream, Index persons, InputDims dims) {
  if (persons < 1) throw ConfigError("person count must be positive");
  CostReport single = count_flops(downstream, dims);
  CostReport report;
  report.label = "per-person(" + std::to_string(persons) + ")";
  for (CostRow row : single.rows) {
    row.macs *= u(persons);
    row.aux *= u(persons);
    report.add(std::move(row));
  }
  return report;
}

std::string format_cost_table(const CostReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-12s %5s %5s %5s %5s %6s %6s %3s %15s %12s %15s\n", "row", "kind",
                "J_in", "J_out", "T_in", "T_out", "C_in", "C_out", "K", "macs", "params", "aux");
  os << "# " << report.label << '\n' << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-18s %-12s %5lld %5lld %5lld %5lld %6lld %6lld %3lld %15llu %12llu %15llu\n",
                  r.name.c_str(), r.kind.c_str(), static_cast<long long>(r.joints_in),
                  static_cast<long long>(r.joints_out), static_cast<long long>(r.frames_in),
                  static_cast<long long>(r.frames_out), static_cast<long long>(r.in_channels),
                  static_cast<long long>(r.out_channels), static_cast<long long>(r.groups),
                  static_cast<unsigned long long>(r.macs), static_cast<unsigned long long>(r.params),
                  static_cast<unsigned long long>(r.aux));
    os << line;
  }
  std::snprintf(line, sizeof line, "%-18s %-12s %53s %15llu %12llu %15llu\n", "total", "", "",
                static_cast<unsigned long long>(report.total_macs),
                static_cast<unsigned long long>(report.total_params),
                static_cast<unsigned long long>(report.total_aux));
  os << line;
  std::snprintf(line, sizeof line, "FLOPs (%s): %.3fG\n", report.two_flops_per_mac ? "2 per MAC" : "1 per MAC",
                static_cast<double>(report.flops()) / 1e9);
  os << line;
  return os.str();
}

std::string format_cost_records(const CostReport& report) {
  std::ostringstream os;
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"report", report.label}, {"row", r.name},       {"kind", r.kind},
                        {"joints_in", r.joints_in}, {"joints_out", r.joints_out}, {"frames_in", r.frames_in},
                        {"frames_out", r.frames_out}, {"in_channels", r.in_channels},
                        {"out_channels", r.out_channels}, {"groups", r.groups},   {"macs", r.macs},
                        {"params", r.params},       {"aux", r.aux}};
    os << j.dump() << '\n';
  }
  nlohmann::json total = {{"report", report.label}, {"row", "total"},          {"macs", report.total_macs},
                          {"params", report.total_params}, {"aux", report.total_aux}, {"flops", report.flops()},
                          {"flops_per_mac", report.two_flops_per_mac ? 2 : 1}};
  os << total.dump() << '\n';
  return os.str();
}

}  // namespace skelet
