#include "skelet/layout.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace skelet {

std::string_view region_name(Region r) {
  switch (r) {
    case Region::kBody: return "body";
    case Region::kFace: return "face";
    case Region::kLeftHand: return "left_hand";
    case Region::kRightHand: return "right_hand";
    case Region::kLeftFoot: return "left_foot";
    case Region::kRightFoot: return "right_foot";
  }
  return "unknown";
}

void KeypointLayout::validate() const {
  if (names.size() != regions.size()) {
    throw LayoutError("layout '" + id + "': " + std::to_string(names.size()) + " names but " +
                      std::to_string(regions.size()) + " region tags");
  }
  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= count() || b >= count()) {
      throw LayoutError("layout '" + id + "': edge (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") outside [0, " + std::to_string(count()) + ")");
    }
    if (a == b) throw LayoutError("layout '" + id + "': self edge at " + std::to_string(a));
    const Edge key{std::min(a, b), std::max(a, b)};
    if (!seen.insert(key).second) {
      throw LayoutError("layout '" + id + "': duplicate edge (" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
    }
  }
}

namespace {

void add_hand(KeypointLayout& l, const std::string& side, Region region, Index wrist) {
  static const char* fingers[] = {"thumb", "forefinger", "middle_finger", "ring_finger", "pinky_finger"};
  const Index root = l.count();
  l.names.push_back(side + "_hand_root");
  l.regions.push_back(region);
  l.edges.emplace_back(wrist, root);
  for (const char* finger : fingers) {
    Index prev = root;
    for (int seg = 1; seg <= 4; ++seg) {
      const Index idx = l.count();
      l.names.push_back(side + "_" + finger + std::to_string(seg));
      l.regions.push_back(region);
      l.edges.emplace_back(prev, idx);
      prev = idx;
    }
  }
}

KeypointLayout make_wholebody() {
  KeypointLayout l;
  l.id = "wholebody";
  l.names = {"nose",        "left_eye",       "right_eye",      "left_ear",    "right_ear",
             "left_shoulder", "right_shoulder", "left_elbow",   "right_elbow", "left_wrist",
             "right_wrist", "left_hip",       "right_hip",      "left_knee",   "right_knee",
             "left_ankle",  "right_ankle"};
  l.regions.assign(17, Region::kBody);
  l.edges = {{0, 1},  {0, 2},  {1, 3},   {2, 4},   {0, 5},   {0, 6},   {5, 7},   {7, 9},
             {6, 8},  {8, 10}, {5, 11},  {6, 12},  {11, 13}, {13, 15}, {12, 14}, {14, 16}};

  const char* left_feet[] = {"left_big_toe", "left_small_toe", "left_heel"};
  const char* right_feet[] = {"right_big_toe", "right_small_toe", "right_heel"};
  for (const char* n : left_feet) {
    l.edges.emplace_back(15, l.count());
    l.names.emplace_back(n);
    l.regions.push_back(Region::kLeftFoot);
  }
  for (const char* n : right_feet) {
    l.edges.emplace_back(16, l.count());
    l.names.emplace_back(n);
    l.regions.push_back(Region::kRightFoot);
  }

  // 68-landmark face as open contour chains, each anchored at the nose.
  const Index face0 = l.count();
  for (int i = 0; i < 68; ++i) {
    l.names.push_back("face_" + std::to_string(i));
    l.regions.push_back(Region::kFace);
  }
  const std::pair<int, int> contours[] = {{0, 17}, {17, 22}, {22, 27}, {27, 31}, {31, 36},
                                          {36, 42}, {42, 48}, {48, 60}, {60, 68}};
  for (auto [begin, end] : contours) {
    l.edges.emplace_back(0, face0 + begin);
    for (int i = begin + 1; i < end; ++i) l.edges.emplace_back(face0 + i - 1, face0 + i);
  }

  add_hand(l, "left", Region::kLeftHand, 9);
  add_hand(l, "right", Region::kRightHand, 10);
  l.validate();
  return l;
}

std::vector<Index> expressive_indices() {
  std::vector<Index> kept;
  for (Index i = 0; i < kWholeBodyCount; ++i) {
    if (i < 23 || i > 90) kept.push_back(i);
  }
  return kept;
}

}  // namespace

const KeypointLayout& wholebody_layout() {
  static const KeypointLayout layout = make_wholebody();
  return layout;
}

const KeypointLayout& expressive_layout() {
  static const KeypointLayout layout =
      restrict_layout(wholebody_layout(), expressive_indices(), "expressive");
  return layout;
}

KeypointLayout chain_layout(Index joints) {
  if (joints < 1) throw LayoutError("chain layout needs at least one joint");
  KeypointLayout l;
  l.id = "custom";
  for (Index i = 0; i < joints; ++i) {
    l.names.push_back("joint_" + std::to_string(i));
    l.regions.push_back(Region::kBody);
    if (i > 0) l.edges.emplace_back(i - 1, i);
  }
  return l;
}

KeypointLayout restrict_layout(const KeypointLayout& layout, const std::vector<Index>& kept,
                               std::string id) {
  std::vector<Index> remap(static_cast<std::size_t>(layout.count()), -1);
  KeypointLayout out;
  out.id = std::move(id);
  Index prev = -1;
  for (Index k : kept) {
    if (k <= prev || k >= layout.count()) {
      throw LayoutError("restrict_layout: kept indices must be ascending and within the layout");
    }
    prev = k;
    remap[static_cast<std::size_t>(k)] = out.count();
    out.names.push_back(layout.names[static_cast<std::size_t>(k)]);
    out.regions.push_back(layout.regions[static_cast<std::size_t>(k)]);
  }
  for (auto [a, b] : layout.edges) {
    const Index ra = remap[static_cast<std::size_t>(a)];
    const Index rb = remap[static_cast<std::size_t>(b)];
    if (ra >= 0 && rb >= 0) out.edges.emplace_back(ra, rb);
  }
  return out;
}

std::vector<Edge> parse_edge_table(std::string_view text) {
  std::vector<Edge> edges;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long a = 0, b = 0;
    if (!(fields >> a)) continue;
    std::string rest;
    if (!(fields >> b) || (fields >> rest)) throw ParseError("expected `i j`", lineno);
    if (a < 0 || b < 0) throw ParseError("negative joint index", lineno);
    edges.emplace_back(a, b);
  }
  return edges;
}

std::vector<Edge> read_edge_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LayoutError("cannot open edge table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_edge_table(buf.str());
}

std::string format_edge_table(const std::vector<Edge>& edges) {
  std::ostringstream os;
  for (auto [a, b] : edges) os << a << ' ' << b << '\n';
  return os.str();
}

}  // namespace skelet
