#ifndef BPIDA_SEARCH_HPP
#define BPIDA_SEARCH_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bpida/puzzle.hpp"

namespace bpida {

inline constexpr int kInfiniteCost = std::numeric_limits<int>::max();

enum class SearchMode { kFirstSolution, kAllSolutions };

struct SearchNode {
  PuzzleState state;
  std::uint16_t g = 0;
  std::uint16_t h = 0;
  std::optional<Direction> last_op;

  int f() const { return g + h; }

  static SearchNode root(const Domain& domain, const PuzzleState& state) {
    return SearchNode{state, 0, static_cast<std::uint16_t>(domain.h(state)), std::nullopt};
  }
};

/// Expansion statistics for one f-limit.
struct IterationStats {
  int limit = 0;
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  /// Smallest pruned f above `limit`; kInfiniteCost when the iteration
  /// found a goal or nothing was pruned.
  int f_next = kInfiniteCost;
};

struct SearchOutcome {
  bool found = false;
  /// Cost of the returned solutions; valid when found.
  int cost = -1;
  /// FirstSolution: one path. AllSolutions: every optimal path.
  std::vector<Path> solutions;
  /// Next limit when the last iteration was exhausted.
  int f_next = kInfiniteCost;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t nodes_generated = 0;
  std::vector<IterationStats> iterations;
};

struct DfsOptions {
  /// Entries per explicit DFS stack.
  std::size_t stack_capacity = 128;
};

/// Resumable explicit-stack f-limited DFS. One call to step() pops a single
/// node, tests it for the goal, and pushes its children whose f does not
/// exceed the limit. Used directly by the sequential solver and as the lane
/// program of the thread-parallel schedulers.
class DfsContext {
 public:
  struct Entry {
    SearchNode node;
    /// Index of the root this entry descends from.
    std::uint32_t root = 0;
  };

  DfsContext(const Domain& domain, int limit, SearchMode mode, std::size_t capacity);

  /// Starts a new subtree. `prefix` is the path from the start state to
  /// `node` (its size equals node.g). pre: empty().
  void push_root(const SearchNode& node, std::uint32_t root, Path prefix);

  bool empty() const { return stack_.empty(); }
  std::size_t stack_size() const { return stack_.size(); }
  /// Pending entries, bottom first.
  const std::vector<Entry>& entries() const { return stack_; }

  struct StepResult {
    bool expanded = false;
    bool goal = false;
    std::uint32_t root = 0;
  };

  /// pre: !empty(). Throws StackOverflow when a push exceeds capacity.
  StepResult step();

  /// Removes and returns the shallowest pending entry (bottom of the stack)
  /// together with its path from the start state. pre: stack_size() >= 1.
  std::pair<Entry, Path> steal_bottom();

  int limit() const { return limit_; }
  int f_next() const { return f_next_; }
  std::uint64_t expanded() const { return expanded_; }
  std::uint64_t generated() const { return generated_; }
  const std::vector<Path>& solutions() const { return solutions_; }

 private:
  const Domain* domain_;
  int limit_;
  SearchMode mode_;
  std::size_t capacity_;
  std::vector<Entry> stack_;
  /// Moves from the start to the most recently popped node.
  Path path_;
  int base_g_ = 0;
  int f_next_ = kInfiniteCost;
  std::uint64_t expanded_ = 0;
  std::uint64_t generated_ = 0;
  std::vector<Path> solutions_;
};

/// f-limited DFS from `root`. pre: root.f() <= limit.
/// FirstSolution stops at the first goal popped; AllSolutions collects every
/// goal path and never stops early. `prefix` is the path leading to `root`.
SearchOutcome f_limited_dfs(const Domain& domain, const SearchNode& root, int limit,
                            SearchMode mode, const DfsOptions& options = {},
                            Path prefix = {});

struct IdaOptions {
  DfsOptions dfs;
  /// Throw IterationLimit once the limit would exceed this value.
  int max_limit = 255;
};

/// Sequential IDA* starting at h(start), advancing to f_next each iteration.
SearchOutcome ida_star(const Domain& domain, const PuzzleState& start, SearchMode mode,
                       const IdaOptions& options = {});

SearchOutcome ida_star(const Instance& instance, SearchMode mode,
                       const IdaOptions& options = {});

/// Replays `path` from `start`; returns the reached state or nullopt if a
/// move is inapplicable.
std::optional<PuzzleState> replay(const PuzzleState& start, const Path& path);

/// Lexicographic order on paths by direction value (U < R < D < L).
bool path_less(const Path& a, const Path& b);

}  // namespace bpida

#endif  // BPIDA_SEARCH_HPP
