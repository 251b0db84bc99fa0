#include "skelet/serialize.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "detail/binary.hpp"

namespace skelet {

namespace detail {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UsageError("failed writing '" + path + "'");
}

}  // namespace detail

namespace {

constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;

}  // namespace

std::string encode_parameters(const ParameterFile& file) {
  detail::ByteWriter w;
  w.bytes(kParameterMagic, sizeof kParameterMagic);
  w.integer<std::uint32_t>(kParameterVersion);
  w.integer<std::uint64_t>(file.config_hash);
  w.integer<std::uint32_t>(static_cast<std::uint32_t>(file.entries.size()));
  for (const auto& e : file.entries) {
    w.integer<std::uint32_t>(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.integer<std::uint32_t>(static_cast<std::uint32_t>(e.value.rank()));
    for (Index d : e.value.shape()) w.integer<std::uint64_t>(static_cast<std::uint64_t>(d));
    for (Index i = 0; i < e.value.size(); ++i) w.f64(e.value.flat()[i]);
  }
  return w.data();
}

ParameterFile decode_parameters(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.bytes(8, "magic") != std::string_view(kParameterMagic, 8)) {
    throw FormatError("not a parameter container (bad magic)", 0);
  }
  const std::size_t version_at = r.offset();
  const auto version = r.integer<std::uint32_t>("version");
  if (version != kParameterVersion) {
    throw FormatError("unsupported parameter container version " + std::to_string(version), version_at);
  }
  ParameterFile file;
  file.config_hash = r.integer<std::uint64_t>("config hash");
  const auto count = r.integer<std::uint32_t>("entry count");
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::size_t entry_at = r.offset();
    const auto name_len = r.integer<std::uint32_t>("name length");
    if (name_len == 0 || name_len > kMaxNameLength) {
      throw FormatError("implausible parameter name length " + std::to_string(name_len), entry_at);
    }
    NamedTensor e;
    e.name = std::string(r.bytes(name_len, "parameter name"));
    const std::size_t rank_at = r.offset();
    const auto rank = r.integer<std::uint32_t>("rank");
    if (rank == 0 || rank > kMaxRank) {
      throw FormatError("parameter '" + e.name + "' has unsupported rank " + std::to_string(rank), rank_at);
    }
    Shape shape;
    std::uint64_t total = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::size_t dim_at = r.offset();
      const auto d = r.integer<std::uint64_t>("extent");
      if (d == 0 || d > (std::uint64_t{1} << 40) || total > (std::uint64_t{1} << 40) / d) {
        throw FormatError("parameter '" + e.name + "' has an invalid extent", dim_at);
      }
      total *= d;
      shape.push_back(static_cast<Index>(d));
    }
    if (r.remaining() / 8 < total) {
      throw FormatError("truncated payload for '" + e.name + "': expected " + std::to_string(total * 8) +
                            " bytes, found " + std::to_string(r.remaining()),
                        r.offset());
    }
    e.value = Tensor(std::move(shape));
    for (Index i = 0; i < e.value.size(); ++i) e.value.flat()[i] = r.f64("payload");
    file.entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) {
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after last entry", r.offset());
  }
  return file;
}

void write_parameters(const ParameterFile& file, const std::string& path) {
  detail::write_file_bytes(path, encode_parameters(file));
}

ParameterFile read_parameters(const std::string& path) { return decode_parameters(detail::read_file_bytes(path)); }

ParameterFile export_parameters(Network& net) {
  ParameterFile file;
  file.config_hash = net.config_hash();
  for (auto& [name, p] : net.named_parameters()) file.entries.push_back({name, p->value});
  return file;
}

void import_parameters(Network& net, const ParameterFile& file) {
  if (file.config_hash != net.config_hash()) {
    std::ostringstream os;
    os << "parameter file config hash " << std::hex << file.config_hash << " does not match network hash "
       << net.config_hash();
    throw ConfigError(os.str());
  }
  auto named = net.named_parameters();
  if (named.size() != file.entries.size()) {
    throw ConfigError("parameter file has " + std::to_string(file.entries.size()) + " entries, network has " +
                      std::to_string(named.size()));
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const NamedTensor& e = file.entries[i];
    if (e.name != named[i].first || e.value.shape() != named[i].second->value.shape()) {
      throw ConfigError("parameter entry " + std::to_string(i) + " ('" + e.name + "' " +
                        shape_string(e.value.shape()) + ") does not match '" + named[i].first + "' " +
                        shape_string(named[i].second->value.shape()));
    }
  }
  for (std::size_t i = 0; i < named.size(); ++i) named[i].second->value = file.entries[i].value;
}

}  // namespace skelet
