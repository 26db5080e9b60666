#ifndef BPIDA_BLOCK_PARALLEL_HPP
#define BPIDA_BLOCK_PARALLEL_HPP

#include <cstdint>
#include <vector>

#include "bpida/parallel.hpp"
#include "bpida/simt.hpp"

namespace bpida {

inline constexpr int kOperatorCount = 4;

/// How one repetition maps popped nodes onto lanes.
struct PopPlan {
  std::size_t popped = 0;
  /// Lanes with no node to work on this repetition.
  int masked_lanes = 0;
};

/// Node i of a repetition goes to lanes [i*ops, i*ops + ops). Throws
/// ConfigError unless lanes is a positive multiple of ops.
PopPlan plan_parallel_pop(std::size_t stack_size, int lanes, int ops = kOperatorCount);

/// Reference-counted parent links, so that a popped node can recover its
/// path once its stack entry is gone.
class PathArena {
 public:
  static constexpr std::int32_t kNone = -1;

  /// New record with no references yet.
  std::int32_t allocate(std::int32_t parent, std::optional<Direction> op);
  void add_ref(std::int32_t index) { ++records_[static_cast<std::size_t>(index)].refs; }
  /// Frees `index` if unreferenced, then frees each ancestor whose count drops to zero.
  void release(std::int32_t index);
  /// Moves from the block root down to `index`.
  Path path_to(std::int32_t index) const;
  std::size_t live() const { return records_.size() - free_.size(); }

 private:
  struct Record {
    std::int32_t parent = kNone;
    std::uint32_t refs = 0;
    std::int8_t op = -1;
  };
  std::vector<Record> records_;
  std::vector<std::int32_t> free_;
};

struct BlockParallelOptions {
  simt::MachineConfig machine;
  SearchMode mode = SearchMode::kFirstSolution;
  RootSetOptions roots;
  /// 0 means root_multiplier x block count.
  std::size_t root_target = 0;
  int root_multiplier = 4;
  /// Entries per block-shared stack.
  std::size_t stack_capacity = 4096;
  /// Split heavy roots between iterations, using repetitions as the load.
  bool static_balancing = true;
  int max_limit = 255;
  simt::TraceSink* trace = nullptr;
};

/// Persistent block count: machine.blocks, or resident capacity when unset.
int bpida_blocks(const simt::MachineConfig& config);

/// Block-parallel IDA*: one block per root, whose lanes share a stack and
/// expand lanes/4 nodes per repetition, one operator per lane.
ParallelResult run_bpida(const Domain& domain, const PuzzleState& start,
                         const BlockParallelOptions& options);

}  // namespace bpida

#endif  // BPIDA_BLOCK_PARALLEL_HPP
