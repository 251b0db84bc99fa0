#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skelet/gradcheck.hpp"
#include "skelet/mapping.hpp"
#include "skelet/profiler.hpp"
#include "skelet/run_config.hpp"
#include "skelet/selection.hpp"
#include "skelet/sequence_io.hpp"
#include "skelet/serialize.hpp"

namespace {

using namespace skelet;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kFormat = 3,
  kConfig = 4,
  kNumeric = 5,
  kGradCheckFailed = 6,
};

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage:
      return kUsage;
    case ErrorCategory::kFormat:
    case ErrorCategory::kParse:
      return kFormat;
    case ErrorCategory::kConfig:
    case ErrorCategory::kLayout:
    case ErrorCategory::kPartition:
    case ErrorCategory::kDimension:
    case ErrorCategory::kIndex:
      return kConfig;
    case ErrorCategory::kNumeric:
      return kNumeric;
    case ErrorCategory::kInsufficientData:
      return kOther;
  }
  return kOther;
}

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kDimension: return "dimension";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kIndex: return "index";
    case ErrorCategory::kNumeric: return "numeric";
    case ErrorCategory::kLayout: return "layout";
    case ErrorCategory::kPartition: return "partition";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kInsufficientData: return "insufficient-data";
  }
  return "error";
}

struct GlobalOptions {
  std::string config = "default";
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const GlobalOptions& g) {
  RunConfig cfg = (g.config == "default" || g.config == "toy") ? preset_config(g.config) : read_run_config(g.config);
  apply_env_overrides(cfg);
  for (const auto& s : g.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (g.seed) cfg.seed = g.seed;
  cfg.validate();
  return cfg;
}

std::uint64_t require_seed(const GlobalOptions& g, const char* command) {
  if (!g.seed) throw UsageError(std::string("--seed is required for '") + command + "'");
  return *g.seed;
}

const KeypointLayout& layout_for(const SkeletonSequence& seq, KeypointLayout& scratch) {
  if (seq.layout_id == "wholebody") return wholebody_layout();
  if (seq.layout_id == "expressive") return expressive_layout();
  scratch = chain_layout(seq.joints());
  return scratch;
}

// Person `person` of a sequence as a network input: whole-body inputs are
// reduced to the expressive set when the network expects 65 joints, and
// the frame axis is uniformly resampled when lengths differ.
Tensor network_input(const SkeletonSequence& seq, const RunConfig& cfg, Index person, std::mt19937_64& rng) {
  SkeletonSequence s = seq;
  if (s.joints() == kWholeBodyCount && cfg.network.joints.front() == kExpressiveCount) {
    s = select_expressive(s, cfg.selection);
  }
  if (s.frames() != cfg.network.frames) s = uniform_sample(s, cfg.network.frames, rng);
  if (s.channels() != cfg.network.in_channels) {
    throw DimensionError("sequence has " + std::to_string(s.channels()) + " channels, network expects " +
                         std::to_string(cfg.network.in_channels));
  }
  return s.person(person);
}

Network build_from(const RunConfig& cfg, bool skelet, std::uint64_t seed) {
  const ResolvedModel model = resolve_model(cfg);
  return build_network(cfg.network, model.layout, model.partitions, skelet, seed);
}

int run_stats(const GlobalOptions& g, const std::vector<std::string>& inputs, const std::string& output) {
  const RunConfig cfg = load_config(g);
  std::vector<SkeletonSequence> dataset;
  for (const auto& path : inputs) dataset.push_back(read_sequence(path));
  for (const auto& s : dataset) {
    if (s.layout_id != dataset.front().layout_id || s.joints() != dataset.front().joints()) {
      throw UsageError("all stats inputs must share one layout");
    }
  }
  KeypointLayout scratch;
  const KeypointLayout& layout = layout_for(dataset.front(), scratch);
  const KeypointStats stats = compute_stats(dataset, layout, cfg.selection);
  const std::string tsv = format_report_tsv(rank_keypoints(stats, layout, cfg.selection));
  if (output.empty()) {
    std::cout << tsv;
  } else {
    std::ofstream(output) << tsv;
  }
  return kOk;
}

int run_select(const GlobalOptions& g, const std::string& input, const std::string& output,
               const std::string& protocol) {
  load_config(g);
  const SkeletonSequence seq = read_sequence(input);
  const SelectionProtocol p = parse_protocol(protocol);
  const SkeletonSequence out = select_keypoints(seq, protocol_indices(p));
  write_sequence(out, output);
  std::cout << protocol_name(p) << ": " << seq.joints() << " -> " << out.joints() << " joints, wrote " << output
            << '\n';
  return kOk;
}

int run_import(const GlobalOptions& g, const std::string& input, const std::string& output,
               std::optional<Index> max_persons, std::optional<std::int32_t> label) {
  const RunConfig cfg = load_config(g);
  SkeletonSequence seq = import_keypoint_json(input, max_persons.value_or(cfg.ip.max_persons));
  seq.label = label;
  write_sequence(seq, output);
  std::cout << "imported (" << seq.persons() << ", " << seq.joints() << ", " << seq.frames() << ", "
            << seq.channels() << ") to " << output << '\n';
  return kOk;
}

int run_profile(const GlobalOptions& g, const std::string& which, const std::string& format,
                std::optional<Index> persons) {
  const RunConfig cfg = load_config(g);
  const bool jsonl = format == "jsonl";
  auto emit = [&](CostReport report) {
    report.two_flops_per_mac = cfg.two_flops_per_mac;
    std::cout << (jsonl ? format_cost_records(report) : format_cost_table(report));
    return report;
  };
  std::optional<CostReport> on, off;
  if (which == "on" || which == "both") on = emit(count_flops(build_from(cfg, true, 0)));
  if (which == "off" || which == "both") off = emit(count_flops(build_from(cfg, false, 0)));
  if (on && off) {
    const double ratio = static_cast<double>(on->flops()) / static_cast<double>(off->flops());
    if (jsonl) {
      std::cout << nlohmann::json{{"row", "ratio"}, {"numerator", "skelet"}, {"denominator", "baseline"},
                                  {"value", ratio}}
                       .dump()
                << '\n';
    } else {
      char line[96];
      std::snprintf(line, sizeof line, "ratio skelet/baseline: %.4f\n", ratio);
      std::cout << line;
    }
  }
  if (persons) {
    RunConfig down = cfg;
    down.network.in_channels = cfg.ip.channels;
    Network net = build_from(down, which != "off", 0);
    emit(count_ip_flops(cfg.ip, *persons, cfg.network.joints.front(), cfg.network.frames, cfg.network.in_channels,
                        net));
    Network single = build_from(cfg, which != "off", 0);
    emit(count_without_ip(single, *persons,
                          {cfg.network.joints.front(), cfg.network.frames, cfg.network.in_channels}));
  }
  return kOk;
}

int run_infer(const GlobalOptions& g, const std::string& input, const std::string& params, Index person) {
  const RunConfig cfg = load_config(g);
  const std::uint64_t seed = require_seed(g, "infer");
  Network net = build_from(cfg, cfg.skelet, seed);
  if (!params.empty()) import_parameters(net, read_parameters(params));
  std::mt19937_64 rng(seed);
  const Tensor x = network_input(read_sequence(input), cfg, person, rng);
  const Tensor logits = infer(net, x);
  Index best = 0;
  logits.flat().maxCoeff(&best);
  nlohmann::json out = {{"argmax", best}, {"logits", std::vector<double>(logits.flat().begin(), logits.flat().end())}};
  std::cout << out.dump() << '\n';
  return kOk;
}

int run_train(const GlobalOptions& g, const std::vector<std::string>& inputs, std::optional<Index> synthetic,
              const std::string& output) {
  RunConfig cfg = load_config(g);
  const std::uint64_t seed = require_seed(g, "train");
  cfg.train.seed = seed;
  std::vector<LabeledSample> data;
  if (synthetic) {
    data = synthetic_motion_dataset(cfg.network.joints.front(), cfg.network.frames, cfg.network.num_classes,
                                    *synthetic, seed);
  } else {
    if (inputs.empty()) throw UsageError("train needs sequence files or --synthetic");
    std::mt19937_64 rng(seed);
    for (const auto& path : inputs) {
      const SkeletonSequence seq = read_sequence(path);
      if (!seq.label) throw UsageError("training file '" + path + "' carries no label");
      data.push_back({network_input(seq, cfg, 0, rng), *seq.label});
    }
  }
  Network net = build_from(cfg, cfg.skelet, seed);
  const TrainLog log = train(net, data, cfg.train);
  for (const auto& e : log.epochs) {
    std::cout << nlohmann::json{{"epoch", e.epoch}, {"lr", e.learning_rate}, {"loss", e.loss}, {"accuracy", e.accuracy}}
                     .dump()
              << '\n';
  }
  const double acc = evaluate_accuracy(net, data);
  std::cout << nlohmann::json{{"final_accuracy", acc}, {"diverged", log.diverged}}.dump() << '\n';
  if (!output.empty()) write_parameters(export_parameters(net), output);
  return log.diverged ? kNumeric : kOk;
}

int run_gradcheck(const GlobalOptions& g, double tolerance) {
  const RunConfig cfg = load_config(g);
  const std::uint64_t seed = require_seed(g, "gradcheck");
  Network net = build_from(cfg, cfg.skelet, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor x({cfg.network.joints.front(), cfg.network.frames, cfg.network.in_channels});
  for (Index i = 0; i < x.size(); ++i) x.flat()[i] = normal(rng);
  const Index label = std::uniform_int_distribution<Index>(0, cfg.network.num_classes - 1)(rng);
  const std::vector<Parameter*> params = net.parameters();
  const GradCheckReport report = check_gradients(
      [&](Tape& tape) { return softmax_cross_entropy(forward(net, tape.constant(x)), label); }, params);
  char line[160];
  std::snprintf(line, sizeof line, "max_rel_error %.6e over %zu coordinates (tolerance %.1e)\n", report.max_rel_error,
                report.coordinates, tolerance);
  std::cout << line;
  return report.max_rel_error <= tolerance ? kOk : kGradCheckFailed;
}

void report_partition(const std::string& name, const PartitionMap& p) {
  p.validate();
  const MappingMatrix m = init_downsample_matrix(p);
  const double col_err = (m.dense().colwise().sum().array() - 1.0).abs().maxCoeff();
  std::size_t smallest = p.parts.front().size(), largest = 0;
  for (const auto& part : p.parts) {
    smallest = std::min(smallest, part.size());
    largest = std::max(largest, part.size());
  }
  char line[200];
  std::snprintf(line, sizeof line, "%s: %lld -> %lld joints, part sizes %zu..%zu, max |column sum - 1| %.3g\n",
                name.c_str(), static_cast<long long>(p.source_count), static_cast<long long>(p.target_count()),
                smallest, largest, col_err);
  std::cout << line;
}

int run_partition_check(const GlobalOptions& g, const std::vector<std::string>& tables, Index source_count) {
  const RunConfig cfg = load_config(g);
  if (tables.empty()) {
    const ResolvedModel model = resolve_model(cfg);
    for (std::size_t s = 0; s < model.partitions.size(); ++s) {
      report_partition("stage " + std::to_string(s) + "->" + std::to_string(s + 1), model.partitions[s]);
    }
    build_network(cfg.network, model.layout, model.partitions, true, 0);
    std::cout << "partition chain matches the joint schedule\n";
    return kOk;
  }
  for (const auto& path : tables) report_partition(path, read_partition_table(path, source_count));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skeleton action recognition toolkit: keypoint statistics, selection, profiling and training"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "Preset name (default, toy) or key=value config file");
  app.add_option("--set", g.settings, "Override one config key, key=value (repeatable)");
  app.add_option("--seed", g.seed, "Seed for every random draw of the command");

  std::vector<std::string> inputs;
  std::string input, output, protocol = "wo-face", params, skelet_mode = "both", format = "text";
  std::optional<Index> max_persons, persons, synthetic;
  std::optional<std::int32_t> label;
  Index person = 0;
  Index source_count = 0;
  double tolerance = 1e-3;

  auto* stats = app.add_subcommand("stats", "Rank keypoints by video and motion variance (TSV)");
  stats->add_option("inputs", inputs, "Sequence files")->required();
  stats->add_option("-o,--output", output, "Write the table here instead of stdout");

  auto* select = app.add_subcommand("select", "Keep a keypoint subset of a 133-point sequence");
  select->add_option("-i,--input", input)->required();
  select->add_option("-o,--output", output)->required();
  select->add_option("--protocol", protocol, "wholebody, wo-face, wo-feet, simple-fingers, wo-hands");

  auto* import = app.add_subcommand("import", "Convert JSON Lines keypoints to a sequence file");
  import->add_option("-i,--input", input)->required();
  import->add_option("-o,--output", output)->required();
  import->add_option("--max-persons", max_persons);
  import->add_option("--label", label);

  auto* profile = app.add_subcommand("profile", "Analytic MAC/parameter report");
  profile->add_option("--skelet", skelet_mode)->check(CLI::IsMember({"on", "off", "both"}));
  profile->add_option("--format", format)->check(CLI::IsMember({"text", "jsonl"}));
  profile->add_option("--persons", persons, "Also report instance pooling for this many persons");

  auto* infer_cmd = app.add_subcommand("infer", "Logits for one person of a sequence");
  infer_cmd->add_option("-i,--input", input)->required();
  infer_cmd->add_option("--params", params, "Parameter container from train");
  infer_cmd->add_option("--person", person);

  auto* train_cmd = app.add_subcommand("train", "Train on labelled sequence files or a synthetic set");
  train_cmd->add_option("inputs", inputs, "Labelled sequence files");
  train_cmd->add_option("--synthetic", synthetic, "Generate this many synthetic samples instead");
  train_cmd->add_option("-o,--output", output, "Write trained parameters here");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the full network");
  gradcheck->add_option("--tolerance", tolerance);

  auto* partition_check = app.add_subcommand("partition-check", "Validate partition tables");
  partition_check->add_option("tables", inputs, "Partition table files (default: the configured chain)");
  partition_check->add_option("--source-count", source_count, "Source joints (default: inferred)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (stats->parsed()) return run_stats(g, inputs, output);
    if (select->parsed()) return run_select(g, input, output, protocol);
    if (import->parsed()) return run_import(g, input, output, max_persons, label);
    if (profile->parsed()) return run_profile(g, skelet_mode, format, persons);
    if (infer_cmd->parsed()) return run_infer(g, input, params, person);
    if (train_cmd->parsed()) return run_train(g, inputs, synthetic, output);
    if (gradcheck->parsed()) return run_gradcheck(g, tolerance);
    if (partition_check->parsed()) return run_partition_check(g, inputs, source_count);
  } catch (const Error& e) {
    std::cerr << "error [" << category_name(e.category()) << "]: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kUsage;
}
