#ifndef BPIDA_PARALLEL_HPP
#define BPIDA_PARALLEL_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "bpida/rootset.hpp"
#include "bpida/search.hpp"
#include "bpida/simt.hpp"

namespace bpida {

/// One dynamic load-balancing event inside a block.
struct RebalanceEvent {
  int limit = 0;
  int block = 0;
  std::uint64_t tick = 0;
  int running = 0;
  int idle = 0;
  std::uint64_t work = 0;
  std::uint64_t since = 0;
  std::uint64_t previous_duration = 0;
  double threshold = 0.0;
  int moved = 0;
  std::uint64_t duration = 0;
};

/// Statistics for one f-limit.
struct IterationReport {
  int limit = 0;
  /// Interior plus worker expansions; comparable to the sequential count.
  std::uint64_t expanded = 0;
  /// Nodes with f <= limit consumed while building or splitting roots.
  std::uint64_t interior = 0;
  std::uint64_t generated = 0;
  int f_next = kInfiniteCost;
  bool found = false;
  std::size_t root_count = 0;
  /// BPIDA* fetch-evaluate-expand repetitions, summed over blocks.
  std::uint64_t repetitions = 0;
  simt::StepCounters counters;
  std::vector<RebalanceEvent> rebalances;
  UpdateStats update;
};

/// What a kernel returns for one f-limit over the current root set.
struct KernelResult {
  simt::StepCounters counters;
  /// Measured work under each root (expansions or repetitions).
  std::vector<double> root_loads;
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t repetitions = 0;
  int f_next = kInfiniteCost;
  std::vector<Path> solutions;
  std::vector<RebalanceEvent> rebalances;
};

using Kernel = std::function<KernelResult(const RootSet& roots, int limit)>;

struct DriverOptions {
  SearchMode mode = SearchMode::kFirstSolution;
  std::size_t root_target = 1;
  bool static_balancing = false;
  RootSetOptions roots;
  int max_limit = 255;
};

struct ParallelResult {
  SearchOutcome outcome;
  std::vector<IterationReport> iterations;
  /// Counters summed over all iterations.
  simt::StepCounters totals;
  /// sm_efficiency and ipc_proxy over the whole run; load_balance from the
  /// next-to-last iteration (0 when the run had a single iteration).
  simt::Metrics metrics;
};

/// Outer iterative-deepening loop shared by every parallel scheme: builds the
/// root set, starts at h(start), runs `kernel` per limit, folds
/// interior nodes into the counts, and rebalances between iterations.
ParallelResult run_iterations(const Domain& domain, const PuzzleState& start,
                              const DriverOptions& options, const Kernel& kernel);

/// Sorts by cost then lexicographically and keeps only the cheapest paths.
std::vector<Path> cheapest_sorted(std::vector<Path> paths);

}  // namespace bpida

#endif  // BPIDA_PARALLEL_HPP
