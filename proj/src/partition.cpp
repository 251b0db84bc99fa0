#include "skelet/partition.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "skelet/errors.hpp"

namespace skelet {

void PartitionMap::validate() const {
  if (source_count <= 0) throw PartitionError("partition source count must be positive");
  std::vector<int> hits(static_cast<std::size_t>(source_count), 0);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].empty()) throw PartitionError("part " + std::to_string(k) + " is empty");
    for (Index j : parts[k]) {
      if (j < 0 || j >= source_count) {
        throw PartitionError("part " + std::to_string(k) + " references joint " + std::to_string(j) +
                             " outside [0, " + std::to_string(source_count) + ")");
      }
      if (++hits[static_cast<std::size_t>(j)] > 1) {
        throw PartitionError("joint " + std::to_string(j) + " appears in more than one part");
      }
    }
  }
  for (std::size_t j = 0; j < hits.size(); ++j) {
    if (hits[j] == 0) throw PartitionError("joint " + std::to_string(j) + " is not covered by any part");
  }
}

std::vector<Index> PartitionMap::owner() const {
  std::vector<Index> out(static_cast<std::size_t>(source_count), -1);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (Index j : parts[k]) out[static_cast<std::size_t>(j)] = static_cast<Index>(k);
  }
  return out;
}

namespace {

std::vector<Index> run(Index first, Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = first + i;
  return v;
}

PartitionMap make_65_to_27() {
  PartitionMap p;
  p.source_count = 65;
  p.parts = {{0}, {1, 2}, {3, 4}, {5}, {6}, {7}, {8}, {9}, {10}, {11}, {12}, {13}, {14},
             {15, 17, 18, 19}, {16, 20, 21, 22}};
  for (Index root : {23, 44}) {
    p.parts.push_back({root});
    for (Index finger = 0; finger < 5; ++finger) p.parts.push_back(run(root + 1 + 4 * finger, 4));
  }
  p.validate();
  return p;
}

PartitionMap make_27_to_11() {
  PartitionMap p;
  p.source_count = 27;
  p.parts = {{0, 1, 2},    {3, 5, 7},    {4, 6, 8},    {15, 16, 17}, {18, 19, 20}, {21, 22, 23},
             {24, 25, 26}, {9},          {10},         {11, 13},     {12, 14}};
  p.validate();
  return p;
}

}  // namespace

const PartitionMap& expressive_to_27() {
  static const PartitionMap p = make_65_to_27();
  return p;
}

const PartitionMap& stage27_to_11() {
  static const PartitionMap p = make_27_to_11();
  return p;
}

PartitionMap singleton_partition(Index joints) {
  PartitionMap p;
  p.source_count = joints;
  for (Index j = 0; j < joints; ++j) p.parts.push_back({j});
  p.validate();
  return p;
}

PartitionMap contiguous_partition(Index joints, Index width) {
  if (width < 1) throw PartitionError("contiguous partition width must be positive");
  PartitionMap p;
  p.source_count = joints;
  for (Index j = 0; j < joints; j += width) p.parts.push_back(run(j, std::min(width, joints - j)));
  p.validate();
  return p;
}

PartitionMap parse_partition_table(std::string_view text, Index source_count) {
  PartitionMap p;
  p.source_count = source_count;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("expected `k: j1 j2 ...`", lineno);
    long long k = -1;
    std::istringstream head(line.substr(0, colon));
    std::string extra;
    if (!(head >> k) || (head >> extra)) throw ParseError("bad part index", lineno);
    if (k != static_cast<long long>(p.parts.size())) {
      throw ParseError("part index " + std::to_string(k) + " out of sequence, expected " +
                           std::to_string(p.parts.size()),
                       lineno);
    }
    std::istringstream members(line.substr(colon + 1));
    std::vector<Index> part;
    std::string tok;
    while (members >> tok) {
      try {
        std::size_t used = 0;
        const long long j = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        part.push_back(static_cast<Index>(j));
      } catch (const std::exception&) {
        throw ParseError("bad joint index '" + tok + "'", lineno);
      }
    }
    std::sort(part.begin(), part.end());
    p.parts.push_back(std::move(part));
  }
  if (source_count <= 0) {
    Index top = -1;
    for (const auto& part : p.parts) {
      for (Index j : part) top = std::max(top, j);
    }
    p.source_count = top + 1;
  }
  p.validate();
  return p;
}

PartitionMap read_partition_table(const std::filesystem::path& path, Index source_count) {
  std::ifstream in(path);
  if (!in) throw PartitionError("cannot open partition table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_partition_table(buf.str(), source_count);
}

std::string format_partition_table(const PartitionMap& p) {
  std::ostringstream os;
  for (std::size_t k = 0; k < p.parts.size(); ++k) {
    os << k << ':';
    for (Index j : p.parts[k]) os << ' ' << j;
    os << '\n';
  }
  return os.str();
}

}  // namespace skelet
