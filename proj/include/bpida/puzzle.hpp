#ifndef BPIDA_PUZZLE_HPP
#define BPIDA_PUZZLE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bpida {

/// Direction the blank moves. Every operator has unit cost.
enum class Direction : std::uint8_t { kUp = 0, kRight = 1, kDown = 2, kLeft = 3 };

inline constexpr int kNumDirections = 4;

/// Default operator ordering used by every solver.
inline constexpr std::array<Direction, kNumDirections> kDefaultOrder{
    Direction::kUp, Direction::kRight, Direction::kDown, Direction::kLeft};

constexpr Direction inverse(Direction d) {
  return static_cast<Direction>((static_cast<unsigned>(d) + 2U) & 3U);
}

char to_char(Direction d);

/// Solution path as a sequence of blank moves.
using Path = std::vector<Direction>;

std::string to_string(const Path& path);

/// N x N sliding-tile board, N in {3, 4}. Tiles are packed one nibble per
/// cell, row-major; 0 is the blank.
class PuzzleState {
 public:
  static constexpr int kMaxSide = 4;
  static constexpr int kMaxCells = kMaxSide * kMaxSide;

  PuzzleState() = default;

  /// Tiles ascending with the blank at index 0.
  static PuzzleState goal(int side);

  /// Validates that `tiles` is a permutation of 0..side*side-1.
  /// Throws MalformedInstance otherwise.
  static PuzzleState from_tiles(int side, std::span<const int> tiles);

  int side() const { return side_; }
  int cell_count() const { return side_ * side_; }
  int blank() const { return blank_; }

  int tile_at(int index) const {
    return static_cast<int>((cells_ >> (4 * index)) & 0xFU);
  }

  std::vector<int> tiles() const;

  bool can_apply(Direction d) const {
    const int row = blank_ / side_;
    const int col = blank_ % side_;
    switch (d) {
      case Direction::kUp: return row > 0;
      case Direction::kDown: return row < side_ - 1;
      case Direction::kLeft: return col > 0;
      case Direction::kRight: return col < side_ - 1;
    }
    return false;
  }

  /// Board index the blank moves to; pre: can_apply(d).
  int target_of(Direction d) const {
    switch (d) {
      case Direction::kUp: return blank_ - side_;
      case Direction::kDown: return blank_ + side_;
      case Direction::kLeft: return blank_ - 1;
      case Direction::kRight: return blank_ + 1;
    }
    return blank_;
  }

  /// Inapplicable moves yield nullopt; the receiver is never modified.
  std::optional<PuzzleState> apply(Direction d) const;

  /// pre: can_apply(d).
  PuzzleState apply_unchecked(Direction d) const {
    const int to = target_of(d);
    const std::uint64_t tile = (cells_ >> (4 * to)) & 0xFU;
    PuzzleState next = *this;
    next.cells_ &= ~(std::uint64_t{0xF} << (4 * to));
    next.cells_ |= tile << (4 * blank_);
    next.blank_ = static_cast<std::uint8_t>(to);
    return next;
  }

  /// True iff the tiles form a permutation and the blank index is consistent.
  bool is_valid() const;

  std::uint64_t packed() const { return cells_; }

  std::string to_string() const;

  friend bool operator==(const PuzzleState&, const PuzzleState&) = default;

 private:
  std::uint64_t cells_ = 0;
  std::uint8_t blank_ = 0;
  std::uint8_t side_ = 0;
};

static_assert(sizeof(PuzzleState) <= 16);

struct PuzzleStateHash {
  std::size_t operator()(const PuzzleState& s) const noexcept {
    std::uint64_t x = s.packed() ^ (static_cast<std::uint64_t>(s.side()) << 60);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};

/// Sum of Manhattan distances of the non-blank tiles. pre: equal sides.
int manhattan(const PuzzleState& state, const PuzzleState& goal);

/// Precomputed per-tile distance table for a fixed goal.
class ManhattanTable {
 public:
  explicit ManhattanTable(const PuzzleState& goal);

  int distance(int tile, int index) const { return dist_[tile][index]; }
  int evaluate(const PuzzleState& state) const;

  /// Change in Manhattan distance when the blank moves in direction d.
  /// pre: state.can_apply(d). Only the moved tile is inspected.
  int delta(const PuzzleState& state, Direction d) const {
    const int to = state.target_of(d);
    const int tile = state.tile_at(to);
    return dist_[tile][state.blank()] - dist_[tile][to];
  }

 private:
  std::array<std::array<std::int8_t, PuzzleState::kMaxCells>, PuzzleState::kMaxCells> dist_{};
};

int manhattan_delta(const PuzzleState& state, Direction d, const PuzzleState& goal);

/// Solvability against an arbitrary goal: permutation parity must match the
/// parity of the blank's Manhattan displacement.
bool solvable(const PuzzleState& start, const PuzzleState& goal);

struct Instance {
  int id = 0;
  PuzzleState start;
  PuzzleState goal;
};

/// Parses "[<id>:] t0 t1 ... " or "<id> t0 t1 ..." (N*N+1 integers). The goal
/// is always canonical. Throws MalformedInstance or Unsolvable.
Instance parse_instance(std::string_view text, int default_id = 0);

/// One instance per non-empty line; '#' starts a comment.
std::vector<Instance> parse_instances(std::string_view text);
std::vector<Instance> load_instances(const std::string& path);

std::string format_instance(const Instance& instance);

/// Search-domain configuration shared by every solver.
struct Domain {
  explicit Domain(int side);
  explicit Domain(const Instance& instance) : Domain(instance.start.side()) {}

  int side;
  PuzzleState goal;
  ManhattanTable table;
  bool parent_pruning = true;
  std::array<Direction, kNumDirections> order = kDefaultOrder;
  /// Added to every heuristic evaluation. Test hook only; 0 in production.
  int heuristic_bias = 0;

  int h(const PuzzleState& s) const { return table.evaluate(s) + heuristic_bias; }
  bool is_goal(const PuzzleState& s) const { return s == goal; }

  bool pruned(std::optional<Direction> arrived, Direction d) const {
    return parent_pruning && arrived && *arrived == inverse(d);
  }
};

}  // namespace bpida

#endif  // BPIDA_PUZZLE_HPP
