#include "bpida/block_parallel.hpp"

#include <algorithm>

#include "bpida/errors.hpp"
#include "bpida/shared_stack.hpp"

namespace bpida {

PopPlan plan_parallel_pop(std::size_t stack_size, int lanes, int ops) {
  if (ops < 1 || lanes < ops || lanes % ops != 0) {
    throw ConfigError("lanes per block must be a positive multiple of the operator count");
  }
  PopPlan plan;
  plan.popped = std::min(stack_size, static_cast<std::size_t>(lanes / ops));
  plan.masked_lanes = lanes - static_cast<int>(plan.popped) * ops;
  return plan;
}

std::int32_t PathArena::allocate(std::int32_t parent, std::optional<Direction> op) {
  Record r{parent, 0, op ? static_cast<std::int8_t>(*op) : std::int8_t{-1}};
  if (!free_.empty()) {
    const std::int32_t index = free_.back();
    free_.pop_back();
    records_[static_cast<std::size_t>(index)] = r;
    return index;
  }
  records_.push_back(r);
  return static_cast<std::int32_t>(records_.size() - 1);
}

void PathArena::release(std::int32_t index) {
  while (index != kNone) {
    Record& r = records_[static_cast<std::size_t>(index)];
    if (r.refs > 0) return;
    free_.push_back(index);
    index = r.parent;
    if (index != kNone) --records_[static_cast<std::size_t>(index)].refs;
  }
}

Path PathArena::path_to(std::int32_t index) const {
  Path out;
  while (index != kNone) {
    const Record& r = records_[static_cast<std::size_t>(index)];
    if (r.op >= 0) out.push_back(static_cast<Direction>(r.op));
    index = r.parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

int bpida_blocks(const simt::MachineConfig& config) {
  return config.blocks > 0 ? config.blocks : config.resident_blocks();
}

namespace {

struct BlockEntry {
  SearchNode node;
  std::int32_t parent = PathArena::kNone;
};

struct Accumulator {
  std::vector<double> root_loads;
  std::vector<std::uint64_t> per_block;
  std::vector<Path> solutions;
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t repetitions = 0;
  int f_next = kInfiniteCost;
};

class SearchBlock final : public simt::BlockProgram {
 public:
  SearchBlock(const Domain& domain, const RootEntry& root, int block, int limit,
              const BlockParallelOptions& options, Accumulator& acc)
      : domain_(domain),
        block_(block),
        limit_(limit),
        mode_(options.mode),
        lanes_(options.machine.lanes_per_block),
        warp_size_(options.machine.warp_size),
        prefix_(root.prefix),
        stack_(options.stack_capacity),
        acc_(acc) {
    if (root.node.f() > limit) {
      acc_.f_next = std::min(acc_.f_next, root.node.f());
    } else {
      stack_.atomic_put(BlockEntry{root.node, PathArena::kNone});
    }
    batch_.reserve(static_cast<std::size_t>(lanes_ / kOperatorCount));
  }

  simt::WarpIssue step_warp(int warp) override {
    if (!stepped_this_tick_) {
      stepped_this_tick_ = true;
      repetition();
    }
    if (active_lanes_ < 0) return {};
    const int lo = warp * warp_size_;
    const int count = std::clamp(active_lanes_ - lo, 0, warp_size_);
    const std::uint64_t mask =
        count >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
    return {true, mask};
  }

  void end_tick() override { stepped_this_tick_ = false; }
  bool done() const override { return stack_.empty(); }
  bool halt_requested() const override { return halt_; }

 private:
  /// One fetch-evaluate-expand cycle. Sets active_lanes_ to -1 when the
  /// stack was empty and nothing ran.
  void repetition() {
    const PopPlan plan = plan_parallel_pop(stack_.size(), lanes_);
    if (plan.popped == 0) {
      active_lanes_ = -1;
      return;
    }
    stack_.parallel_pop(plan.popped, batch_);
    active_lanes_ = lanes_ - plan.masked_lanes;
    ++acc_.repetitions;
    acc_.root_loads[static_cast<std::size_t>(block_)] += 1.0;
    children_.clear();
    for (const BlockEntry& e : batch_) {
      const SearchNode& node = e.node;
      const std::int32_t rec =
          arena_.allocate(e.parent, e.parent == PathArena::kNone ? std::nullopt : node.last_op);
      ++acc_.expanded;
      ++acc_.per_block[static_cast<std::size_t>(block_)];
      if (domain_.is_goal(node.state)) {
        Path p = prefix_;
        const Path tail = arena_.path_to(rec);
        p.insert(p.end(), tail.begin(), tail.end());
        acc_.solutions.push_back(std::move(p));
        if (mode_ == SearchMode::kFirstSolution) halt_ = true;
        arena_.release(rec);
        continue;
      }
      std::uint32_t kept = 0;
      // Lane k of this node applies operator order[k].
      for (Direction d : domain_.order) {
        if (domain_.pruned(node.last_op, d) || !node.state.can_apply(d)) continue;
        ++acc_.generated;
        const int h = node.h + domain_.table.delta(node.state, d);
        const int f = node.g + 1 + h;
        if (f > limit_) {
          acc_.f_next = std::min(acc_.f_next, f);
          continue;
        }
        children_.push_back(BlockEntry{
            SearchNode{node.state.apply_unchecked(d), static_cast<std::uint16_t>(node.g + 1),
                       static_cast<std::uint16_t>(h), d},
            rec});
        arena_.add_ref(rec);
        ++kept;
      }
      if (kept == 0) arena_.release(rec);
    }
    stack_.atomic_put_batch(children_);
  }

  const Domain& domain_;
  int block_;
  int limit_;
  SearchMode mode_;
  int lanes_;
  int warp_size_;
  Path prefix_;
  SharedStack<BlockEntry> stack_;
  PathArena arena_;
  std::vector<BlockEntry> batch_;
  std::vector<BlockEntry> children_;
  Accumulator& acc_;
  int active_lanes_ = -1;
  bool stepped_this_tick_ = false;
  bool halt_ = false;
};

}  // namespace

ParallelResult run_bpida(const Domain& domain, const PuzzleState& start,
                         const BlockParallelOptions& options) {
  options.machine.validate();
  if (options.machine.lanes_per_block != options.machine.warp_size) {
    throw ConfigError("bpida requires lanes_per_block == warp_size");
  }
  plan_parallel_pop(0, options.machine.lanes_per_block);
  if (options.root_multiplier < 1) throw ConfigError("root multiplier must be >= 1");

  DriverOptions driver;
  driver.mode = options.mode;
  driver.root_target = options.root_target > 0
                           ? options.root_target
                           : static_cast<std::size_t>(options.root_multiplier) *
                                 static_cast<std::size_t>(bpida_blocks(options.machine));
  driver.static_balancing = options.static_balancing;
  driver.roots = options.roots;
  driver.max_limit = options.max_limit;

  Kernel kernel = [&](const RootSet& roots, int limit) {
    Accumulator acc;
    acc.root_loads.assign(roots.size(), 0.0);
    acc.per_block.assign(roots.size(), 0);
    simt::MachineRun run = simt::run_machine(
        options.machine, static_cast<int>(roots.size()),
        [&](int block) -> std::unique_ptr<simt::BlockProgram> {
          return std::make_unique<SearchBlock>(
              domain, roots.entries[static_cast<std::size_t>(block)], block, limit, options, acc);
        },
        options.trace);
    KernelResult k;
    k.counters = std::move(run.counters);
    k.counters.per_lane_expansions = std::move(acc.per_block);
    k.root_loads = std::move(acc.root_loads);
    k.expanded = acc.expanded;
    k.generated = acc.generated;
    k.repetitions = acc.repetitions;
    k.f_next = acc.f_next;
    k.solutions = std::move(acc.solutions);
    return k;
  };
  return run_iterations(domain, start, driver, kernel);
}

}  // namespace bpida
