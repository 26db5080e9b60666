#include "bpida/thread_parallel.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <sstream>

#include "bpida/errors.hpp"

namespace bpida {

double balance_threshold(const BalanceState& s) {
  const std::uint64_t span = s.L + s.t;
  if (span == 0) return 0.0;
  return static_cast<double>(s.W) / static_cast<double>(span);
}

TriggerDecision check_balance_trigger(const BalanceState& s, int running_lanes, int total_lanes) {
  if (running_lanes < 0 || total_lanes < 0 || running_lanes > total_lanes) {
    throw ConfigError("running lanes must lie in [0, total lanes]");
  }
  if (s.L + s.t == 0) return TriggerDecision::kHold;
  // t >= L/2 without truncation.
  if (2 * s.t < s.L) return TriggerDecision::kHold;
  return static_cast<double>(running_lanes) < balance_threshold(s) ? TriggerDecision::kFire
                                                                   : TriggerDecision::kHold;
}

int grid_lanes(const simt::MachineConfig& config) {
  const int blocks = config.blocks > 0 ? config.blocks : config.resident_blocks();
  return blocks * config.lanes_per_block;
}

namespace {

/// Lane with the most stack entries (>= 2), ties to the lower index.
int find_donor(std::span<const LaneWork> lanes) {
  int best = -1;
  std::size_t best_size = 1;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const std::size_t size = lanes[i].ctx.stack_size();
    if (size > best_size) {
      best = static_cast<int>(i);
      best_size = size;
    }
  }
  return best;
}

}  // namespace

int rebalance_lanes(std::span<LaneWork> lanes, bool multi_entry) {
  std::vector<std::size_t> thieves;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    if (lanes[i].idle()) thieves.push_back(i);
  }
  int moved = 0;
  for (std::size_t thief : thieves) {
    const int donor_index = find_donor(lanes);
    if (donor_index < 0) break;
    LaneWork& donor = lanes[static_cast<std::size_t>(donor_index)];
    const std::size_t count = multi_entry ? donor.ctx.stack_size() / 2 : 1;
    for (std::size_t k = 0; k < count; ++k) {
      auto [entry, prefix] = donor.ctx.steal_bottom();
      lanes[thief].pending.push_back(WorkItem{entry.node, entry.root, std::move(prefix)});
      ++moved;
    }
  }
  return moved;
}

namespace {

/// Results shared by every block of one kernel launch.
struct Accumulator {
  std::vector<double> root_loads;
  std::vector<std::uint64_t> per_lane;
  std::vector<RebalanceEvent> events;
  std::vector<Path> solutions;
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  int f_next = kInfiniteCost;
};

class ThreadBlock final : public simt::BlockProgram {
 public:
  ThreadBlock(const Domain& domain, const RootSet& roots,
              const std::vector<std::vector<std::size_t>>& assignment, int block, int limit,
              ThreadBalancing balancing, const ThreadParallelOptions& options, Accumulator& acc)
      : limit_(limit),
        block_(block),
        balancing_(balancing),
        options_(options),
        acc_(acc),
        warp_size_(options.machine.warp_size),
        lane_count_(options.machine.lanes_per_block),
        lane_base_(block * options.machine.lanes_per_block),
        live_(static_cast<std::size_t>(options.machine.warps_per_block()), 0) {
    lanes_.reserve(static_cast<std::size_t>(lane_count_));
    for (int i = 0; i < lane_count_; ++i) {
      lanes_.push_back(
          LaneWork{DfsContext(domain, limit, options.mode, options.dfs.stack_capacity), {}});
      for (std::size_t r : assignment[static_cast<std::size_t>(lane_base_ + i)]) {
        const RootEntry& e = roots.entries[r];
        lanes_.back().pending.push_back(WorkItem{e.node, static_cast<std::uint32_t>(r), e.prefix});
      }
      if (refill(lanes_.back())) set_live(i);
    }
  }

  ~ThreadBlock() override {
    for (const LaneWork& lane : lanes_) {
      acc_.expanded += lane.ctx.expanded();
      acc_.generated += lane.ctx.generated();
      acc_.f_next = std::min(acc_.f_next, lane.ctx.f_next());
      for (const Path& p : lane.ctx.solutions()) acc_.solutions.push_back(p);
    }
    acc_.f_next = std::min(acc_.f_next, skipped_f_);
  }

  simt::WarpIssue step_warp(int warp) override {
    const auto w = static_cast<std::size_t>(warp);
    if (stall_ > 0) return {true, 0};
    const std::uint64_t mask = live_[w];
    if (mask == 0) return {};
    for (std::uint64_t bits = mask; bits != 0; bits &= bits - 1) {
      const int lane_index = warp * warp_size_ + std::countr_zero(bits);
      LaneWork& lane = lanes_[static_cast<std::size_t>(lane_index)];
      const DfsContext::StepResult r = lane.ctx.step();
      ++tick_work_;
      ++acc_.per_lane[static_cast<std::size_t>(lane_base_ + lane_index)];
      acc_.root_loads[r.root] += 1.0;
      if (r.goal && options_.mode == SearchMode::kFirstSolution) halt_ = true;
      if (lane.ctx.empty() && !refill(lane)) clear_live(lane_index);
    }
    return {true, mask};
  }

  void end_tick() override {
    ++tick_;
    if (stall_ > 0) {
      --stall_;
      return;
    }
    state_.t += 1;
    state_.W += tick_work_;
    tick_work_ = 0;
    if (balancing_ != ThreadBalancing::kFull) return;
    if (running_ == 0 || running_ == lane_count_) return;
    if (find_donor(lanes_) < 0) return;
    if (check_balance_trigger(state_, running_, lane_count_) == TriggerDecision::kFire) rebalance();
  }

  bool done() const override { return running_ == 0 && stall_ == 0; }
  bool halt_requested() const override { return halt_; }

 private:
  /// Loads the next in-limit item into an empty context.
  bool refill(LaneWork& lane) {
    while (lane.ctx.empty() && !lane.pending.empty()) {
      WorkItem item = std::move(lane.pending.front());
      lane.pending.pop_front();
      if (item.node.f() > limit_) {
        skipped_f_ = std::min(skipped_f_, item.node.f());
        continue;
      }
      lane.ctx.push_root(item.node, item.root, std::move(item.prefix));
    }
    return !lane.ctx.empty();
  }

  void set_live(int lane) {
    live_[static_cast<std::size_t>(lane / warp_size_)] |= std::uint64_t{1} << (lane % warp_size_);
    ++running_;
  }

  void clear_live(int lane) {
    live_[static_cast<std::size_t>(lane / warp_size_)] &= ~(std::uint64_t{1} << (lane % warp_size_));
    --running_;
  }

  bool is_live(int lane) const {
    return (live_[static_cast<std::size_t>(lane / warp_size_)] >> (lane % warp_size_)) & 1U;
  }

  void rebalance() {
    RebalanceEvent ev;
    ev.limit = limit_;
    ev.block = block_;
    ev.tick = tick_;
    ev.running = running_;
    ev.idle = lane_count_ - running_;
    ev.work = state_.W;
    ev.since = state_.t;
    ev.previous_duration = state_.L;
    ev.threshold = balance_threshold(state_);

    const int moved = rebalance_lanes(lanes_, options_.multi_entry_steal);
    for (int i = 0; i < lane_count_; ++i) {
      if (!is_live(i) && refill(lanes_[static_cast<std::size_t>(i)])) set_live(i);
    }

    ev.moved = moved;
    ev.duration = static_cast<std::uint64_t>(moved) + options_.sync_cost;
    state_ = BalanceState{ev.duration, 0, 0};
    stall_ = ev.duration;
    if (options_.trace) {
      std::ostringstream detail;
      detail << "limit=" << ev.limit << " running=" << ev.running << " idle=" << ev.idle
             << " W=" << ev.work << " t=" << ev.since << " L=" << ev.previous_duration
             << " moved=" << ev.moved;
      options_.trace->event(tick_, block_, "rebalance", detail.str());
    }
    acc_.events.push_back(ev);
  }

  int limit_;
  int block_;
  ThreadBalancing balancing_;
  const ThreadParallelOptions& options_;
  Accumulator& acc_;
  int warp_size_;
  int lane_count_;
  int lane_base_;
  std::vector<LaneWork> lanes_;
  std::vector<std::uint64_t> live_;
  int running_ = 0;
  int skipped_f_ = kInfiniteCost;
  BalanceState state_;
  std::uint64_t tick_work_ = 0;
  std::uint64_t tick_ = 0;
  std::uint64_t stall_ = 0;
  bool halt_ = false;
};

}  // namespace

ParallelResult run_thread_parallel(const Domain& domain, const PuzzleState& start,
                                   ThreadBalancing balancing,
                                   const ThreadParallelOptions& options) {
  options.machine.validate();
  const int lanes = grid_lanes(options.machine);
  const int blocks = lanes / options.machine.lanes_per_block;

  DriverOptions driver;
  driver.mode = options.mode;
  driver.root_target =
      options.root_target > 0 ? options.root_target : static_cast<std::size_t>(lanes);
  driver.static_balancing = balancing != ThreadBalancing::kNone;
  driver.roots = options.roots;
  driver.max_limit = options.max_limit;

  Kernel kernel = [&](const RootSet& roots, int limit) {
    const auto assignment = assign_roots(roots, static_cast<std::size_t>(lanes));
    Accumulator acc;
    acc.root_loads.assign(roots.size(), 0.0);
    acc.per_lane.assign(static_cast<std::size_t>(lanes), 0);
    simt::MachineRun run = simt::run_machine(
        options.machine, blocks,
        [&](int block) -> std::unique_ptr<simt::BlockProgram> {
          return std::make_unique<ThreadBlock>(domain, roots, assignment, block, limit, balancing,
                                               options, acc);
        },
        options.trace);
    KernelResult k;
    k.counters = std::move(run.counters);
    k.counters.per_lane_expansions = std::move(acc.per_lane);
    k.root_loads = std::move(acc.root_loads);
    k.expanded = acc.expanded;
    k.generated = acc.generated;
    k.f_next = acc.f_next;
    k.solutions = std::move(acc.solutions);
    k.rebalances = std::move(acc.events);
    return k;
  };
  return run_iterations(domain, start, driver, kernel);
}

ParallelResult run_g1(const Domain& domain, const PuzzleState& start,
                      const ThreadParallelOptions& options) {
  ThreadParallelOptions single = options;
  single.machine.blocks = 1;
  single.machine.lanes_per_block = single.machine.warp_size;
  single.root_target = 1;
  return run_thread_parallel(domain, start, ThreadBalancing::kNone, single);
}

}  // namespace bpida
