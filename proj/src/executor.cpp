#include "bpida/executor.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "bpida/errors.hpp"
#include "bpida/shared_stack.hpp"

namespace bpida {

int executor_threads(const ExecutorOptions& options) {
  if (options.host_threads < 0) throw ConfigError("host_threads must be >= 0");
  if (options.host_threads > 0) return options.host_threads;
  return std::max(2, static_cast<int>(std::thread::hardware_concurrency()));
}

namespace {

/// Merges per-worker results under a mutex.
struct Collector {
  std::mutex mutex;
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t repetitions = 0;
  int f_next = kInfiniteCost;
  std::vector<Path> solutions;

  void add(std::uint64_t e, std::uint64_t g, std::uint64_t reps, int f, std::vector<Path> sols) {
    std::lock_guard lock(mutex);
    expanded += e;
    generated += g;
    repetitions += reps;
    f_next = std::min(f_next, f);
    for (auto& p : sols) solutions.push_back(std::move(p));
  }

  KernelResult result() {
    KernelResult k;
    k.expanded = expanded;
    k.generated = generated;
    k.repetitions = repetitions;
    k.f_next = f_next;
    k.solutions = std::move(solutions);
    return k;
  }
};

/// Runs `work(i)` for i in [0, count) on `threads` workers.
template <typename Fn>
void parallel_for(int threads, std::size_t count, Fn work) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    try {
      for (std::size_t i = next++; i < count; i = next++) work(i);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = count;
    }
  };
  std::vector<std::jthread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(body);
  body();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

struct HostEntry {
  SearchNode node;
  Path path;
};

}  // namespace

ParallelResult execute_thread_parallel(const Domain& domain, const PuzzleState& start,
                                       ThreadBalancing balancing,
                                       const ThreadParallelOptions& options,
                                       const ExecutorOptions& executor) {
  options.machine.validate();
  const int threads = executor_threads(executor);
  const int lanes = grid_lanes(options.machine);

  DriverOptions driver;
  driver.mode = options.mode;
  driver.root_target =
      options.root_target > 0 ? options.root_target : static_cast<std::size_t>(lanes);
  driver.static_balancing = balancing != ThreadBalancing::kNone;
  driver.roots = options.roots;
  driver.max_limit = options.max_limit;

  Kernel kernel = [&](const RootSet& roots, int limit) {
    const auto assignment = assign_roots(roots, static_cast<std::size_t>(lanes));
    std::vector<double> loads(roots.size(), 0.0);
    Collector collector;
    std::atomic<bool> stop{false};
    parallel_for(threads, assignment.size(), [&](std::size_t lane) {
      DfsContext ctx(domain, limit, options.mode, options.dfs.stack_capacity);
      int skipped = kInfiniteCost;
      for (std::size_t r : assignment[lane]) {
        if (stop) break;
        const RootEntry& e = roots.entries[r];
        if (e.node.f() > limit) {
          skipped = std::min(skipped, e.node.f());
          continue;
        }
        ctx.push_root(e.node, static_cast<std::uint32_t>(r), e.prefix);
        const std::uint64_t before = ctx.expanded();
        while (!ctx.empty() && !stop) {
          if (ctx.step().goal && options.mode == SearchMode::kFirstSolution) stop = true;
        }
        // Each root is owned by exactly one lane.
        loads[r] = static_cast<double>(ctx.expanded() - before);
      }
      collector.add(ctx.expanded(), ctx.generated(), 0, std::min(skipped, ctx.f_next()),
                    ctx.solutions());
    });
    KernelResult k = collector.result();
    k.root_loads = std::move(loads);
    return k;
  };
  return run_iterations(domain, start, driver, kernel);
}

ParallelResult execute_bpida(const Domain& domain, const PuzzleState& start,
                             const BlockParallelOptions& options,
                             const ExecutorOptions& executor) {
  options.machine.validate();
  if (options.machine.lanes_per_block != options.machine.warp_size) {
    throw ConfigError("bpida requires lanes_per_block == warp_size");
  }
  if (executor.workers_per_block < 1) throw ConfigError("workers_per_block must be >= 1");
  const PopPlan full = plan_parallel_pop(SIZE_MAX, options.machine.lanes_per_block);
  const int threads = executor_threads(executor);
  const int per_block = std::min(executor.workers_per_block, threads);
  const int groups = std::max(1, threads / per_block);

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
    std::vector<double> loads(roots.size(), 0.0);
    Collector collector;
    std::atomic<bool> stop{false};

    parallel_for(groups, roots.size(), [&](std::size_t root_index) {
      const RootEntry& root = roots.entries[root_index];
      if (root.node.f() > limit) {
        collector.add(0, 0, 0, root.node.f(), {});
        return;
      }
      SharedStack<HostEntry> stack(options.stack_capacity);
      stack.atomic_put(HostEntry{root.node, root.prefix});
      std::atomic<std::uint64_t> repetitions{0};
      std::exception_ptr error;
      std::mutex error_mutex;

      auto work = [&] {
        std::vector<HostEntry> batch;
        std::vector<HostEntry> children;
        std::uint64_t expanded = 0;
        std::uint64_t generated = 0;
        int f_next = kInfiniteCost;
        std::vector<Path> found;
        while (!stop) {
          const std::size_t n = stack.pop_work(full.popped, batch);
          if (n == 0) {
            if (stack.quiescent()) break;
            std::this_thread::yield();
            continue;
          }
          ++repetitions;
          children.clear();
          for (const HostEntry& e : batch) {
            const SearchNode& node = e.node;
            ++expanded;
            if (domain.is_goal(node.state)) {
              found.push_back(e.path);
              if (options.mode == SearchMode::kFirstSolution) stop = true;
              continue;
            }
            for (Direction d : domain.order) {
              if (domain.pruned(node.last_op, d) || !node.state.can_apply(d)) continue;
              ++generated;
              const int h = node.h + domain.table.delta(node.state, d);
              const int f = node.g + 1 + h;
              if (f > limit) {
                f_next = std::min(f_next, f);
                continue;
              }
              HostEntry child{SearchNode{node.state.apply_unchecked(d),
                                         static_cast<std::uint16_t>(node.g + 1),
                                         static_cast<std::uint16_t>(h), d},
                              e.path};
              child.path.push_back(d);
              children.push_back(std::move(child));
            }
          }
          stack.finish_work(n, children);
        }
        collector.add(expanded, generated, 0, f_next, std::move(found));
      };
      auto worker = [&] {
        try {
          work();
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      };

      std::vector<std::jthread> helpers;
      for (int w = 1; w < per_block; ++w) helpers.emplace_back(worker);
      worker();
      helpers.clear();
      if (error) std::rethrow_exception(error);
      loads[root_index] = static_cast<double>(repetitions.load());
      collector.add(0, 0, repetitions.load(), kInfiniteCost, {});
    });
    KernelResult k = collector.result();
    k.root_loads = std::move(loads);
    return k;
  };
  return run_iterations(domain, start, driver, kernel);
}

}  // namespace bpida
