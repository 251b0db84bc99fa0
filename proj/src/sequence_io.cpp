#include "skelet/sequence_io.hpp"

#include <algorithm>
#include <map>
#include <vector>

#include <json.hpp>

#include "detail/binary.hpp"
#include "skelet/layout.hpp"

namespace skelet {

void check_layout_schema(std::string_view layout_id, Index joints, std::uint64_t offset) {
  if (layout_id == "wholebody") {
    if (joints != kWholeBodyCount) {
      throw FormatError("layout 'wholebody' requires 133 joints, header has " + std::to_string(joints), offset);
    }
  } else if (layout_id == "expressive") {
    if (joints != kExpressiveCount) {
      throw FormatError("layout 'expressive' requires 65 joints, header has " + std::to_string(joints), offset);
    }
  } else if (layout_id == "custom") {
    if (joints == kWholeBodyCount || joints == kExpressiveCount) {
      throw FormatError("a " + std::to_string(joints) + "-joint sequence must declare its named layout", offset);
    }
  } else {
    throw FormatError("unknown layout id '" + std::string(layout_id) + "'", offset);
  }
}

namespace {

constexpr std::size_t kLayoutOffset = 28;

}  // namespace

std::string encode_sequence(const SkeletonSequence& seq) {
  seq.validate();
  check_layout_schema(seq.layout_id, seq.joints(), kLayoutOffset);
  detail::ByteWriter w;
  w.bytes(kSequenceMagic, sizeof kSequenceMagic);
  w.integer<std::uint32_t>(kSequenceVersion);
  for (Index d : seq.data.shape()) w.integer<std::uint32_t>(static_cast<std::uint32_t>(d));
  char layout[kLayoutIdBytes] = {};
  std::copy(seq.layout_id.begin(), seq.layout_id.end(), layout);
  w.bytes(layout, kLayoutIdBytes);
  w.integer<std::uint8_t>(seq.label ? 1 : 0);
  const char pad[3] = {};
  w.bytes(pad, 3);
  w.integer<std::int32_t>(seq.label.value_or(0));
  for (Index i = 0; i < seq.data.size(); ++i) w.f64(seq.data.flat()[i]);
  return w.data();
}

SkeletonSequence decode_sequence(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 8 || r.bytes(8, "magic") != std::string_view(kSequenceMagic, 8)) {
    throw FormatError("not a sequence file (bad magic)", 0);
  }
  const auto version = r.integer<std::uint32_t>("version");
  if (version != kSequenceVersion) {
    throw FormatError("unsupported sequence file version " + std::to_string(version), 8);
  }
  Shape shape;
  for (const char* what : {"person count", "joint count", "frame count", "channel count"}) {
    const std::size_t at = r.offset();
    const auto d = r.integer<std::uint32_t>(what);
    if (d == 0) throw FormatError(std::string(what) + " must be positive", at);
    shape.push_back(static_cast<Index>(d));
  }
  const std::string_view raw_layout = r.bytes(kLayoutIdBytes, "layout id");
  const std::string layout(raw_layout.substr(0, std::min(raw_layout.find('\0'), kLayoutIdBytes)));
  check_layout_schema(layout, shape[1], kLayoutOffset);
  const std::size_t flag_at = r.offset();
  const auto has_label = r.integer<std::uint8_t>("label flag");
  if (has_label > 1) throw FormatError("label flag must be 0 or 1", flag_at);
  r.bytes(3, "padding");
  const auto label = r.integer<std::int32_t>("label");

  const std::uint64_t expected = 8 * static_cast<std::uint64_t>(shape_size(shape));
  if (r.remaining() != expected) {
    throw FormatError("payload holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                          std::to_string(expected),
                      kSequenceHeaderBytes);
  }
  Tensor data(std::move(shape));
  for (Index i = 0; i < data.size(); ++i) data.flat()[i] = r.f64("payload");
  std::optional<std::int32_t> lbl;
  if (has_label) lbl = label;
  return SkeletonSequence(std::move(data), layout, lbl);
}

void write_sequence(const SkeletonSequence& seq, const std::string& path) {
  detail::write_file_bytes(path, encode_sequence(seq));
}

SkeletonSequence read_sequence(const std::string& path) { return decode_sequence(detail::read_file_bytes(path)); }

namespace {

struct Record {
  std::int64_t frame;
  std::int64_t person;
  std::size_t line;
  std::vector<double> values;  // 133 * 3
};

Record parse_record(const std::string& line, std::size_t line_no, std::uint64_t line_offset) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw ParseError("record must be a JSON object", line_no);
  for (const char* key : {"frame", "person", "keypoints"}) {
    if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'", line_no);
  }
  if (!j["frame"].is_number_integer() || !j["person"].is_number_integer()) {
    throw ParseError("'frame' and 'person' must be integers", line_no);
  }
  Record rec{j["frame"].get<std::int64_t>(), j["person"].get<std::int64_t>(), line_no, {}};
  if (rec.frame < 0) throw ParseError("'frame' must be non-negative", line_no);
  const auto& kp = j["keypoints"];
  if (!kp.is_array()) throw ParseError("'keypoints' must be an array", line_no);
  const std::size_t expected = 3 * static_cast<std::size_t>(kWholeBodyCount);
  auto number = [&](const nlohmann::json& v) {
    if (!v.is_number()) throw ParseError("keypoint values must be numbers", line_no);
    return v.get<double>();
  };
  if (!kp.empty() && kp[0].is_array()) {
    if (kp.size() != static_cast<std::size_t>(kWholeBodyCount)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 133 keypoints, found " +
                            std::to_string(kp.size()),
                        line_offset);
    }
    for (const auto& triple : kp) {
      if (!triple.is_array() || triple.size() != 3) {
        throw FormatError("line " + std::to_string(line_no) + ": every keypoint needs (x, y, confidence)",
                          line_offset);
      }
      for (const auto& v : triple) rec.values.push_back(number(v));
    }
  } else {
    if (kp.size() != expected) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 399 keypoint values, found " +
                            std::to_string(kp.size()),
                        line_offset);
    }
    for (const auto& v : kp) rec.values.push_back(number(v));
  }
  return rec;
}

}  // namespace

SkeletonSequence parse_keypoint_json(std::string_view text, Index max_persons) {
  if (max_persons < 1) throw ConfigError("max_persons must be positive");
  std::vector<Record> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string line(text.substr(pos, end - pos));
    const std::uint64_t line_offset = pos;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_record(line, line_no, line_offset));
  }
  if (records.empty()) throw InsufficientDataError("keypoint file holds no records");

  std::map<std::int64_t, Index> frame_index;
  std::map<std::int64_t, double> confidence_sum;
  for (const auto& r : records) {
    frame_index.emplace(r.frame, 0);
    auto& sum = confidence_sum[r.person];
    for (std::size_t k = 2; k < r.values.size(); k += 3) sum += r.values[k];
  }
  Index next = 0;
  for (auto& [frame, idx] : frame_index) idx = next++;
  const Index frames = next;

  // Every person is averaged over the same frame count, so ranking by the
  // confidence sum ranks by the mean.
  std::vector<std::pair<std::int64_t, double>> ranked(confidence_sum.begin(), confidence_sum.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (static_cast<Index>(ranked.size()) > max_persons) ranked.resize(static_cast<std::size_t>(max_persons));
  std::vector<std::int64_t> kept;
  for (const auto& [id, sum] : ranked) kept.push_back(id);
  std::sort(kept.begin(), kept.end());
  std::map<std::int64_t, Index> slot;
  for (std::size_t i = 0; i < kept.size(); ++i) slot[kept[i]] = static_cast<Index>(i);

  const Index persons = static_cast<Index>(kept.size());
  const Index joints = kWholeBodyCount;
  Tensor data({persons, joints, frames, 3});
  std::vector<char> seen(static_cast<std::size_t>(persons * frames), 0);
  for (const auto& r : records) {
    auto it = slot.find(r.person);
    if (it == slot.end()) continue;
    const Index i = it->second;
    const Index t = frame_index.at(r.frame);
    char& flag = seen[static_cast<std::size_t>(i * frames + t)];
    if (flag) {
      throw ParseError("duplicate record for person " + std::to_string(r.person) + " in frame " +
                           std::to_string(r.frame),
                       r.line);
    }
    flag = 1;
    for (Index j = 0; j < joints; ++j) {
      for (Index c = 0; c < 3; ++c) data(i, j, t, c) = r.values[static_cast<std::size_t>(j * 3 + c)];
    }
  }
  return SkeletonSequence(std::move(data), "wholebody");
}

SkeletonSequence import_keypoint_json(const std::string& path, Index max_persons) {
  return parse_keypoint_json(detail::read_file_bytes(path), max_persons);
}

}  // namespace skelet
