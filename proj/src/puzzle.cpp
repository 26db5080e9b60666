#include "bpida/puzzle.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bpida/errors.hpp"

namespace bpida {

char to_char(Direction d) {
  switch (d) {
    case Direction::kUp: return 'U';
    case Direction::kRight: return 'R';
    case Direction::kDown: return 'D';
    case Direction::kLeft: return 'L';
  }
  return '?';
}

std::string to_string(const Path& path) {
  std::string out;
  out.reserve(path.size());
  for (Direction d : path) out.push_back(to_char(d));
  return out;
}

PuzzleState PuzzleState::goal(int side) {
  std::vector<int> tiles(static_cast<std::size_t>(side * side));
  for (int i = 0; i < side * side; ++i) tiles[static_cast<std::size_t>(i)] = i;
  return from_tiles(side, tiles);
}

PuzzleState PuzzleState::from_tiles(int side, std::span<const int> tiles) {
  if (side < 3 || side > kMaxSide) {
    throw MalformedInstance("unsupported board side " + std::to_string(side) +
                            " (supported: 3, 4)");
  }
  const int cells = side * side;
  if (static_cast<int>(tiles.size()) != cells) {
    throw MalformedInstance("expected " + std::to_string(cells) + " tiles, got " +
                            std::to_string(tiles.size()));
  }
  PuzzleState s;
  s.side_ = static_cast<std::uint8_t>(side);
  unsigned seen = 0;
  for (int i = 0; i < cells; ++i) {
    const int t = tiles[static_cast<std::size_t>(i)];
    if (t < 0 || t >= cells) {
      throw MalformedInstance("tile " + std::to_string(t) + " out of range");
    }
    if (seen & (1U << t)) {
      throw MalformedInstance("duplicate tile " + std::to_string(t));
    }
    seen |= 1U << t;
    s.cells_ |= static_cast<std::uint64_t>(t) << (4 * i);
    if (t == 0) s.blank_ = static_cast<std::uint8_t>(i);
  }
  return s;
}

std::vector<int> PuzzleState::tiles() const {
  std::vector<int> out(static_cast<std::size_t>(cell_count()));
  for (int i = 0; i < cell_count(); ++i) out[static_cast<std::size_t>(i)] = tile_at(i);
  return out;
}

std::optional<PuzzleState> PuzzleState::apply(Direction d) const {
  if (!can_apply(d)) return std::nullopt;
  return apply_unchecked(d);
}

bool PuzzleState::is_valid() const {
  if (side_ < 3 || side_ > kMaxSide) return false;
  unsigned seen = 0;
  for (int i = 0; i < cell_count(); ++i) {
    const int t = tile_at(i);
    if (t >= cell_count() || (seen & (1U << t))) return false;
    seen |= 1U << t;
  }
  if (cell_count() < kMaxCells && (cells_ >> (4 * cell_count())) != 0) return false;
  return tile_at(blank_) == 0;
}

std::string PuzzleState::to_string() const {
  std::string out;
  for (int i = 0; i < cell_count(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(tile_at(i));
  }
  return out;
}

ManhattanTable::ManhattanTable(const PuzzleState& goal) {
  const int side = goal.side();
  for (int index = 0; index < goal.cell_count(); ++index) {
    const int tile = goal.tile_at(index);
    if (tile == 0) continue;
    for (int at = 0; at < goal.cell_count(); ++at) {
      dist_[tile][at] = static_cast<std::int8_t>(std::abs(at / side - index / side) +
                                                 std::abs(at % side - index % side));
    }
  }
}

int ManhattanTable::evaluate(const PuzzleState& state) const {
  int sum = 0;
  for (int i = 0; i < state.cell_count(); ++i) sum += dist_[state.tile_at(i)][i];
  return sum;
}

int manhattan(const PuzzleState& state, const PuzzleState& goal) {
  return ManhattanTable(goal).evaluate(state);
}

int manhattan_delta(const PuzzleState& state, Direction d, const PuzzleState& goal) {
  return ManhattanTable(goal).delta(state, d);
}

namespace {

int permutation_parity(const PuzzleState& from, const PuzzleState& to) {
  // Parity of the permutation mapping positions in `to` onto positions in
  // `from`, via cycle decomposition.
  const int cells = from.cell_count();
  std::array<int, PuzzleState::kMaxCells> where{};
  for (int i = 0; i < cells; ++i) where[static_cast<std::size_t>(to.tile_at(i))] = i;
  std::array<int, PuzzleState::kMaxCells> perm{};
  for (int i = 0; i < cells; ++i) perm[static_cast<std::size_t>(i)] = where[static_cast<std::size_t>(from.tile_at(i))];
  std::array<bool, PuzzleState::kMaxCells> visited{};
  int transpositions = 0;
  for (int i = 0; i < cells; ++i) {
    if (visited[static_cast<std::size_t>(i)]) continue;
    int len = 0;
    for (int j = i; !visited[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)]) {
      visited[static_cast<std::size_t>(j)] = true;
      ++len;
    }
    transpositions += len - 1;
  }
  return transpositions & 1;
}

}  // namespace

bool solvable(const PuzzleState& start, const PuzzleState& goal) {
  if (start.side() != goal.side()) return false;
  const int side = start.side();
  const int blank_moves = std::abs(start.blank() / side - goal.blank() / side) +
                          std::abs(start.blank() % side - goal.blank() % side);
  return permutation_parity(start, goal) == (blank_moves & 1);
}

namespace {

std::vector<int> parse_ints(std::string_view text) {
  std::vector<int> values;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data() + i) {
      throw MalformedInstance("unexpected token near '" + std::string(text.substr(i, 8)) + "'");
    }
    values.push_back(value);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  return values;
}

}  // namespace

Instance parse_instance(std::string_view text, int default_id) {
  Instance instance;
  instance.id = default_id;
  bool explicit_id = false;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    const auto head = parse_ints(text.substr(0, colon));
    if (head.size() != 1) throw MalformedInstance("malformed instance id prefix");
    instance.id = head.front();
    explicit_id = true;
    text.remove_prefix(colon + 1);
  }
  auto values = parse_ints(text);
  if (!explicit_id && (values.size() == 10 || values.size() == 17)) {
    instance.id = values.front();
    values.erase(values.begin());
  }
  int side = 0;
  if (values.size() == 9) {
    side = 3;
  } else if (values.size() == 16) {
    side = 4;
  } else {
    throw MalformedInstance("expected 9 or 16 tiles, got " + std::to_string(values.size()));
  }
  instance.start = PuzzleState::from_tiles(side, values);
  instance.goal = PuzzleState::goal(side);
  if (!solvable(instance.start, instance.goal)) {
    throw Unsolvable("instance " + std::to_string(instance.id) + " is unsolvable");
  }
  return instance;
}

std::vector<Instance> parse_instances(std::string_view text) {
  std::vector<Instance> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(parse_instance(line, static_cast<int>(out.size()) + 1));
  }
  return out;
}

std::vector<Instance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInstance("cannot open instance file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instances(buffer.str());
}

std::string format_instance(const Instance& instance) {
  return std::to_string(instance.id) + ": " + instance.start.to_string();
}

Domain::Domain(int side_in)
    : side(side_in), goal(PuzzleState::goal(side_in)), table(goal) {}

}  // namespace bpida
