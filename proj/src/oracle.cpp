#include "bpida/oracle.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "bpida/errors.hpp"

namespace bpida {

BfsOracle::BfsOracle(const PuzzleState& goal) : goal_(goal) {
  if (goal.side() != 3) throw ConfigError("the BFS oracle covers the 8-puzzle only");
  std::deque<PuzzleState> queue{goal};
  table_.emplace(goal.packed(), Entry{0, 1});
  while (!queue.empty()) {
    const PuzzleState s = queue.front();
    queue.pop_front();
    const Entry here = table_.at(s.packed());
    max_distance_ = here.distance;
    for (Direction d : kDefaultOrder) {
      if (!s.can_apply(d)) continue;
      const PuzzleState n = s.apply_unchecked(d);
      auto [it, inserted] = table_.try_emplace(n.packed(), Entry{here.distance + 1, 0});
      if (inserted) queue.push_back(n);
      // Every neighbour one step closer contributes its shortest paths.
      if (it->second.distance == here.distance + 1) it->second.optimal_paths += here.optimal_paths;
    }
  }
}

std::optional<BfsOracle::Entry> BfsOracle::lookup(const PuzzleState& state) const {
  if (state.side() != goal_.side()) return std::nullopt;
  const auto it = table_.find(state.packed());
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::vector<Instance> random_instances(int side, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const PuzzleState goal = PuzzleState::goal(side);
  std::vector<Instance> out;
  out.reserve(count);
  std::vector<int> tiles(static_cast<std::size_t>(side * side));
  for (std::size_t i = 0; i < count; ++i) {
    std::iota(tiles.begin(), tiles.end(), 0);
    std::shuffle(tiles.begin(), tiles.end(), rng);
    PuzzleState s = PuzzleState::from_tiles(side, tiles);
    if (!solvable(s, goal)) {
      // Swapping two tiles flips permutation parity.
      auto a = std::find_if(tiles.begin(), tiles.end(), [](int t) { return t != 0; });
      auto b = std::find_if(a + 1, tiles.end(), [](int t) { return t != 0; });
      std::iter_swap(a, b);
      s = PuzzleState::from_tiles(side, tiles);
    }
    out.push_back(Instance{static_cast<int>(i + 1), s, goal});
  }
  return out;
}

}  // namespace bpida
