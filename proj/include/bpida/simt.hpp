#ifndef BPIDA_SIMT_HPP
#define BPIDA_SIMT_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace bpida::simt {

/// Lanes are grouped into warps, warps into blocks; each SM hosts up to
/// `warp_slots_per_sm` resident warps and issues one step for each of up to
/// `issue_width` of them per tick.
struct MachineConfig {
  int warp_size = 32;
  int lanes_per_block = 32;
  int sm_count = 8;
  int warp_slots_per_sm = 6;
  /// Warps stepped per SM per tick; 0 means every resident warp.
  int issue_width = 0;
  /// Total block count; 0 lets the algorithm derive it.
  int blocks = 0;

  int warps_per_block() const { return (lanes_per_block + warp_size - 1) / warp_size; }
  int blocks_per_sm() const { return warp_slots_per_sm / warps_per_block(); }
  /// Concurrently resident blocks across the machine.
  int resident_blocks() const { return sm_count * blocks_per_sm(); }
  int total_cores() const { return sm_count * warp_slots_per_sm * warp_size; }

  /// Throws ConfigError.
  void validate() const;
};

/// Result of issuing one lockstep step on a warp.
struct WarpIssue {
  bool issued = false;
  /// Bit i set iff lane i of the warp executed (was not masked).
  std::uint64_t active_mask = 0;
};

/// Deterministic per-block program. The machine calls step_warp() for each
/// issued warp, then end_tick() once per tick for block-wide sync points.
class BlockProgram {
 public:
  virtual ~BlockProgram() = default;
  virtual WarpIssue step_warp(int warp) = 0;
  virtual void end_tick() {}
  virtual bool done() const = 0;
  /// Stop the whole machine at the end of the current tick.
  virtual bool halt_requested() const { return false; }
};

using BlockFactory = std::function<std::unique_ptr<BlockProgram>(int block_index)>;

struct StepCounters {
  /// warp_size x issued warp steps.
  std::uint64_t lane_steps_total = 0;
  /// Unmasked lanes summed over issued warp steps.
  std::uint64_t lane_steps_active = 0;
  std::uint64_t sm_ticks_total = 0;
  std::uint64_t sm_ticks_occupied = 0;
  /// Machine ticks elapsed.
  std::uint64_t ticks = 0;
  /// Expansions per worker (lane or block), filled by the algorithm.
  std::vector<std::uint64_t> per_lane_expansions;

  StepCounters& operator+=(const StepCounters& other);
  friend bool operator==(const StepCounters&, const StepCounters&) = default;
};

struct Metrics {
  double load_balance = 0.0;
  double sm_efficiency = 0.0;
  double ipc_proxy = 0.0;
};

/// Throws EmptyRun when no worker expanded anything.
Metrics compute_metrics(const StepCounters& counters);

/// max / mean over the per-worker vector. Throws EmptyRun on zero work.
double load_balance(const std::vector<std::uint64_t>& per_worker);

/// Newline-delimited JSON trace records.
class TraceSink {
 public:
  explicit TraceSink(std::ostream& out) : out_(&out) {}
  void warp_step(std::uint64_t tick, int sm, int block, int warp, std::uint64_t mask);
  void event(std::uint64_t tick, int block, const std::string& kind, const std::string& detail = {});

 private:
  std::ostream* out_;
};

struct MachineRun {
  StepCounters counters;
  bool halted = false;
};

/// Runs `block_count` blocks to completion. Blocks beyond resident capacity
/// queue FIFO and are admitted, at the next tick, to the SM with the most
/// free warp slots (ties to the lowest index). Throws DeadlockDetected if a
/// tick issues nothing while blocks are still resident.
MachineRun run_machine(const MachineConfig& config, int block_count, const BlockFactory& factory,
                       TraceSink* trace = nullptr);

}  // namespace bpida::simt

#endif  // BPIDA_SIMT_HPP
