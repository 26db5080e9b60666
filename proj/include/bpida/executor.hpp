#ifndef BPIDA_EXECUTOR_HPP
#define BPIDA_EXECUTOR_HPP

#include "bpida/block_parallel.hpp"
#include "bpida/parallel.hpp"
#include "bpida/thread_parallel.hpp"

namespace bpida {

/// Host-thread execution of the same schemes, for wall-clock runs. Search
/// results (costs, AllSolutions counts and paths) match the simulated
/// machine; step counters stay zero.
struct ExecutorOptions {
  /// Concurrent host workers; 0 means max(2, hardware concurrency).
  int host_threads = 0;
  /// Workers sharing one block's stack in BPIDA*.
  int workers_per_block = 2;
};

int executor_threads(const ExecutorOptions& options);

/// Lanes run their assigned roots to completion on a worker pool; dynamic
/// stealing is not modeled, so kFull behaves like kStatic.
ParallelResult execute_thread_parallel(const Domain& domain, const PuzzleState& start,
                                       ThreadBalancing balancing,
                                       const ThreadParallelOptions& options,
                                       const ExecutorOptions& executor = {});

/// Worker groups claim roots FIFO; the workers of a group share one
/// SharedStack and pop lanes/4 nodes at a time.
ParallelResult execute_bpida(const Domain& domain, const PuzzleState& start,
                             const BlockParallelOptions& options,
                             const ExecutorOptions& executor = {});

}  // namespace bpida

#endif  // BPIDA_EXECUTOR_HPP
