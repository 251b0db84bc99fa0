#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "skelet/sequence.hpp"

namespace skelet {

inline constexpr char kSequenceMagic[8] = {'S', 'K', 'L', 'T', 'S', 'E', 'Q', '\0'};
inline constexpr std::uint32_t kSequenceVersion = 1;
inline constexpr std::size_t kSequenceHeaderBytes = 52;
inline constexpr std::size_t kLayoutIdBytes = 16;

/// Accepted layout ids: "wholebody" (J = 133), "expressive" (J = 65) and
/// "custom" (any other J). Throws FormatError at `offset` otherwise.
void check_layout_schema(std::string_view layout_id, Index joints, std::uint64_t offset = 0);

std::string encode_sequence(const SkeletonSequence& seq);
SkeletonSequence decode_sequence(std::string_view bytes);

void write_sequence(const SkeletonSequence& seq, const std::string& path);
SkeletonSequence read_sequence(const std::string& path);

/// Parses JSON Lines keypoint records, one object per (frame, person):
///   {"frame": 0, "person": 3, "keypoints": [[x, y, c], ...]}
/// `keypoints` holds 133 triples or a flat list of 399 numbers. Frame ids
/// are ordered ascending and renumbered densely; persons are ordered by id.
/// When more than `max_persons` persons appear, the ones with the highest
/// mean confidence over all frames are kept (ties favour the lower id). A
/// person missing from a frame contributes zeros with confidence 0.
SkeletonSequence parse_keypoint_json(std::string_view text, Index max_persons = 10);
SkeletonSequence import_keypoint_json(const std::string& path, Index max_persons = 10);

}  // namespace skelet
