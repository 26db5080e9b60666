#ifndef BPIDA_THREAD_PARALLEL_HPP
#define BPIDA_THREAD_PARALLEL_HPP

#include <cstdint>
#include <deque>
#include <span>

#include "bpida/parallel.hpp"
#include "bpida/simt.hpp"

namespace bpida {

/// Block-local bookkeeping for the dynamic balancing trigger.
struct BalanceState {
  /// Duration of the previous rebalance, in steps.
  std::uint64_t L = 0;
  /// Steps since the previous rebalance finished.
  std::uint64_t t = 0;
  /// Block-wide expansions since the previous rebalance finished.
  std::uint64_t W = 0;
};

enum class TriggerDecision { kHold, kFire };

/// Fires when running < W / (L + t) and t >= L / 2. Holds when L + t == 0.
TriggerDecision check_balance_trigger(const BalanceState& state, int running_lanes,
                                      int total_lanes);

/// Threshold W / (L + t); 0 when L + t == 0.
double balance_threshold(const BalanceState& state);

enum class ThreadBalancing {
  /// Fixed root set, no rebalancing (PSimple).
  kNone,
  /// Root splitting between iterations (PStatic).
  kStatic,
  /// Root splitting plus in-block work stealing (PFullLB).
  kFull,
};

struct ThreadParallelOptions {
  simt::MachineConfig machine;
  SearchMode mode = SearchMode::kFirstSolution;
  DfsOptions dfs;
  RootSetOptions roots;
  /// 0 means one root per lane of the grid.
  std::size_t root_target = 0;
  int max_limit = 255;
  /// Steal half of the donor stack instead of a single entry.
  bool multi_entry_steal = false;
  /// Fixed synchronization cost of a rebalance, in steps.
  std::uint64_t sync_cost = 32;
  simt::TraceSink* trace = nullptr;
};

/// Subtree waiting to be searched by a lane.
struct WorkItem {
  SearchNode node;
  std::uint32_t root = 0;
  /// Path from the start state; size() == node.g.
  Path prefix;
};

/// Per-lane program state: the active DFS plus unstarted work.
struct LaneWork {
  DfsContext ctx;
  std::deque<WorkItem> pending;

  bool idle() const { return ctx.empty() && pending.empty(); }
};

/// One rebalance inside a block: each idle lane, in index order, takes the
/// bottom (shallowest) stack entry from the lane with the most stack entries
/// (at least 2; ties to the lower index), or half of that stack when
/// `multi_entry` is set. Stolen entries are queued as the thief's pending
/// work. Returns the number of entries moved.
int rebalance_lanes(std::span<LaneWork> lanes, bool multi_entry);

/// Lanes in the grid: blocks (or resident capacity when unset) x lanes_per_block.
int grid_lanes(const simt::MachineConfig& config);

ParallelResult run_thread_parallel(const Domain& domain, const PuzzleState& start,
                                   ThreadBalancing balancing,
                                   const ThreadParallelOptions& options);

/// Single lane in a single block, one root: sequential IDA* on the machine.
ParallelResult run_g1(const Domain& domain, const PuzzleState& start,
                      const ThreadParallelOptions& options);

}  // namespace bpida

#endif  // BPIDA_THREAD_PARALLEL_HPP
