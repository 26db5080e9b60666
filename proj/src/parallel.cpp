#include "bpida/parallel.hpp"

#include <algorithm>
#include <string>

#include "bpida/errors.hpp"

namespace bpida {

std::vector<Path> cheapest_sorted(std::vector<Path> paths) {
  std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return path_less(a, b);
  });
  if (!paths.empty()) {
    const std::size_t best = paths.front().size();
    paths.erase(std::find_if(paths.begin(), paths.end(),
                             [&](const Path& p) { return p.size() != best; }),
                paths.end());
  }
  return paths;
}

ParallelResult run_iterations(const Domain& domain, const PuzzleState& start,
                              const DriverOptions& options, const Kernel& kernel) {
  ParallelResult result;
  SearchOutcome& out = result.outcome;
  RootSet roots = create_root_set(domain, start, std::max<std::size_t>(options.root_target, 1),
                                  options.roots);
  // Same first limit as sequential IDA*; roots above it are skipped.
  int limit = domain.h(start);

  while (true) {
    if (limit > options.max_limit) {
      throw IterationLimit("f-limit " + std::to_string(limit) + " exceeds maximum " +
                           std::to_string(options.max_limit));
    }
    KernelResult k = kernel(roots, limit);

    IterationReport report;
    report.limit = limit;
    report.interior = roots.interior_at_most(limit);
    report.expanded = report.interior + k.expanded;
    report.generated = k.generated;
    report.root_count = roots.size();
    report.repetitions = k.repetitions;
    report.f_next = std::min(k.f_next, roots.interior_min_above(limit));
    report.rebalances = std::move(k.rebalances);
    report.counters = std::move(k.counters);
    report.found = !k.solutions.empty();

    out.nodes_expanded += report.expanded;
    out.nodes_generated += report.generated;
    out.iterations.push_back(IterationStats{limit, report.expanded, report.generated,
                                            report.found ? kInfiniteCost : report.f_next});
    result.totals += report.counters;

    if (report.found) {
      out.found = true;
      out.solutions = cheapest_sorted(std::move(k.solutions));
      if (options.mode == SearchMode::kFirstSolution) out.solutions.resize(1);
      out.cost = static_cast<int>(out.solutions.front().size());
      result.iterations.push_back(std::move(report));
      break;
    }
    if (report.f_next == kInfiniteCost) {
      out.f_next = kInfiniteCost;
      result.iterations.push_back(std::move(report));
      break;
    }
    if (options.static_balancing) {
      report.update = update_root_set(domain, roots, k.root_loads, options.roots);
    }
    result.iterations.push_back(std::move(report));
    limit = result.iterations.back().f_next;
  }

  const auto& totals = result.totals;
  if (totals.sm_ticks_total > 0) {
    result.metrics.sm_efficiency =
        static_cast<double>(totals.sm_ticks_occupied) / static_cast<double>(totals.sm_ticks_total);
  }
  if (totals.lane_steps_total > 0) {
    result.metrics.ipc_proxy = static_cast<double>(totals.lane_steps_active) /
                               static_cast<double>(totals.lane_steps_total);
  }
  if (result.iterations.size() >= 2) {
    const auto& lanes = result.iterations[result.iterations.size() - 2].counters.per_lane_expansions;
    bool any = false;
    for (auto v : lanes) any = any || v > 0;
    if (any) result.metrics.load_balance = simt::load_balance(lanes);
  }
  return result;
}

}  // namespace bpida
