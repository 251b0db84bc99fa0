#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "skelet/network.hpp"

namespace skelet {

inline constexpr char kParameterMagic[8] = {'S', 'K', 'L', 'T', 'P', 'R', 'M', '\0'};
inline constexpr std::uint32_t kParameterVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// In-memory form of a parameter container. Byte layout is described in
/// docs/formats.md.
struct ParameterFile {
  std::uint64_t config_hash = 0;
  std::vector<NamedTensor> entries;
};

std::string encode_parameters(const ParameterFile& file);

/// Throws FormatError (with byte offset) on bad magic, unknown version,
/// truncation or trailing bytes.
ParameterFile decode_parameters(std::string_view bytes);

void write_parameters(const ParameterFile& file, const std::string& path);
ParameterFile read_parameters(const std::string& path);

/// Snapshot of every named parameter of `net`, tagged with its config hash.
ParameterFile export_parameters(Network& net);

/// Copies values into `net`. The hash, names and shapes must all match;
/// throws ConfigError otherwise and leaves `net` untouched.
void import_parameters(Network& net, const ParameterFile& file);

}  // namespace skelet
