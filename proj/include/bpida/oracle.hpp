#ifndef BPIDA_ORACLE_HPP
#define BPIDA_ORACLE_HPP

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bpida/puzzle.hpp"

namespace bpida {

/// Exact distances to the goal for every reachable state of a small puzzle,
/// with the number of distinct shortest paths. Built by breadth-first search
/// backwards from the goal.
class BfsOracle {
 public:
  struct Entry {
    int distance = 0;
    std::uint64_t optimal_paths = 0;
  };

  /// Practical only for side 3 (181440 states).
  explicit BfsOracle(const PuzzleState& goal);

  std::optional<Entry> lookup(const PuzzleState& state) const;
  std::size_t size() const { return table_.size(); }
  int max_distance() const { return max_distance_; }
  const PuzzleState& goal() const { return goal_; }

 private:
  PuzzleState goal_;
  std::unordered_map<std::uint64_t, Entry> table_;
  int max_distance_ = 0;
};

/// `count` distinct-seeded random solvable instances, reproducible for a seed.
std::vector<Instance> random_instances(int side, std::size_t count, std::uint64_t seed);

}  // namespace bpida

#endif  // BPIDA_ORACLE_HPP
