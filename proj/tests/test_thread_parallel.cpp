#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bpida/errors.hpp"
#include "bpida/oracle.hpp"
#include "bpida/thread_parallel.hpp"
#include "test_util.hpp"

using namespace bpida;

namespace {

/// A 15-puzzle start a fixed number of random (non-undoing) moves from the goal.
PuzzleState scramble(std::uint32_t seed, int moves) {
  std::mt19937 rng(seed);
  PuzzleState s = PuzzleState::goal(4);
  std::optional<Direction> last;
  for (int m = 0; m < moves;) {
    const auto d = static_cast<Direction>(rng() % 4);
    if (!s.can_apply(d) || (last && *last == inverse(d))) continue;
    s = s.apply_unchecked(d);
    last = d;
    ++m;
  }
  return s;
}

ThreadParallelOptions small_grid(SearchMode mode) {
  ThreadParallelOptions o;
  o.mode = mode;
  o.machine.sm_count = 2;
  o.machine.warp_slots_per_sm = 2;
  return o;
}

std::multiset<std::pair<std::uint64_t, int>> work_multiset(const std::vector<LaneWork>& lanes) {
  std::multiset<std::pair<std::uint64_t, int>> out;
  for (const auto& l : lanes) {
    for (const auto& e : l.ctx.entries()) out.emplace(e.node.state.packed(), e.node.g);
    for (const auto& p : l.pending) out.emplace(p.node.state.packed(), p.node.g);
  }
  return out;
}

std::set<std::string> path_set(const std::vector<Path>& paths) {
  std::set<std::string> out;
  for (const auto& p : paths) out.insert(to_string(p));
  return out;
}

}  // namespace

TEST_CASE("trigger: L=10, t=30, W=640 gives threshold 16") {
  const BalanceState s{10, 30, 640};
  CHECK(balance_threshold(s) == doctest::Approx(16.0));
  CHECK(check_balance_trigger(s, 15, 32) == TriggerDecision::kFire);
  CHECK(check_balance_trigger(s, 16, 32) == TriggerDecision::kHold);
}

TEST_CASE("trigger holds inside the cooldown window") {
  CHECK(check_balance_trigger({10, 4, 100000}, 0, 32) == TriggerDecision::kHold);
  CHECK(check_balance_trigger({10, 5, 100000}, 0, 32) == TriggerDecision::kFire);
  CHECK(check_balance_trigger({11, 5, 100000}, 0, 32) == TriggerDecision::kHold);
}

TEST_CASE("trigger holds with no elapsed time or no work") {
  CHECK(check_balance_trigger({0, 0, 0}, 0, 32) == TriggerDecision::kHold);
  CHECK(check_balance_trigger({0, 0, 500}, 0, 32) == TriggerDecision::kHold);
  CHECK(balance_threshold({0, 0, 500}) == 0.0);
  CHECK(check_balance_trigger({0, 10, 0}, 0, 32) == TriggerDecision::kHold);
}

TEST_CASE("trigger rejects running counts outside [0, total]") {
  CHECK_THROWS_AS(check_balance_trigger({1, 1, 1}, -1, 32), ConfigError);
  CHECK_THROWS_AS(check_balance_trigger({1, 1, 1}, 33, 32), ConfigError);
}

TEST_CASE("trigger is monotone in the running count") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const BalanceState s{rng() % 100, rng() % 100, rng() % 5000};
    bool fired_above = false;
    for (int running = 32; running >= 0; --running) {
      const bool fire = check_balance_trigger(s, running, 32) == TriggerDecision::kFire;
      // Once it fires at some count, it fires at every smaller count.
      if (fired_above) CHECK(fire);
      fired_above = fired_above || fire;
    }
  }
}

TEST_CASE("rebalance_lanes conserves pending work") {
  const Domain domain(4);
  for (bool multi : {false, true}) {
    for (std::uint32_t seed = 1; seed <= 20; ++seed) {
      const PuzzleState start = scramble(seed, 30);
      const int limit = domain.h(start) + 8;
      std::vector<LaneWork> lanes;
      for (int i = 0; i < 8; ++i) {
        lanes.push_back(LaneWork{DfsContext(domain, limit, SearchMode::kAllSolutions, 256), {}});
      }
      // Give lanes 0..2 different amounts of progress; the rest stay idle.
      for (int i = 0; i < 3; ++i) {
        lanes[static_cast<std::size_t>(i)].ctx.push_root(SearchNode::root(domain, start),
                                                          static_cast<std::uint32_t>(i), {});
        for (int k = 0; k < 3 + 11 * i && !lanes[static_cast<std::size_t>(i)].ctx.empty(); ++k) {
          lanes[static_cast<std::size_t>(i)].ctx.step();
        }
      }
      const auto before = work_multiset(lanes);
      std::size_t largest = 0;
      for (const auto& l : lanes) largest = std::max(largest, l.ctx.stack_size());
      const int moved = rebalance_lanes(lanes, multi);
      CHECK(work_multiset(lanes) == before);
      if (largest >= 2) CHECK(moved >= 1);
      for (const auto& l : lanes) {
        for (const auto& p : l.pending) {
          CHECK(p.prefix.size() == p.node.g);
          CHECK(replay(start, p.prefix) == std::optional<PuzzleState>(p.node.state));
        }
      }
    }
  }
}

TEST_CASE("rebalance_lanes takes the bottom entry of the largest stack") {
  const Domain domain(4);
  const PuzzleState start = scramble(9, 30);
  const int limit = domain.h(start) + 10;
  std::vector<LaneWork> lanes;
  for (int i = 0; i < 3; ++i) {
    lanes.push_back(LaneWork{DfsContext(domain, limit, SearchMode::kAllSolutions, 256), {}});
  }
  lanes[1].ctx.push_root(SearchNode::root(domain, start), 0, {});
  for (int k = 0; k < 6; ++k) lanes[1].ctx.step();
  REQUIRE(lanes[1].ctx.stack_size() >= 2);
  const auto bottom = lanes[1].ctx.entries().front().node;
  const std::size_t before = lanes[1].ctx.stack_size();
  CHECK(rebalance_lanes(lanes, false) >= 1);
  REQUIRE(lanes[0].pending.size() == 1);
  CHECK(lanes[0].pending.front().node.state == bottom.state);
  CHECK(lanes[1].ctx.stack_size() < before);
}

TEST_CASE("a single lane on the machine matches sequential IDA*") {
  const Domain domain(3);
  for (const auto& inst : random_instances(3, 30, 31)) {
    for (SearchMode mode : {SearchMode::kFirstSolution, SearchMode::kAllSolutions}) {
      ThreadParallelOptions o;
      o.mode = mode;
      const ParallelResult g1 = run_g1(domain, inst.start, o);
      const SearchOutcome seq = ida_star(domain, inst.start, mode);
      CHECK(g1.outcome.cost == seq.cost);
      CHECK(g1.outcome.nodes_expanded == seq.nodes_expanded);
      CHECK(g1.outcome.solutions == seq.solutions);
      REQUIRE(g1.iterations.size() == seq.iterations.size());
      CHECK(g1.totals.lane_steps_active == seq.nodes_expanded);
    }
  }
}

TEST_CASE("per-limit counts match sequential for every balancing scheme") {
  const Domain domain(3);
  for (ThreadBalancing b : {ThreadBalancing::kNone, ThreadBalancing::kStatic, ThreadBalancing::kFull}) {
    for (const auto& inst : random_instances(3, 25, 32)) {
      const SearchOutcome seq = ida_star(domain, inst.start, SearchMode::kAllSolutions);
      const ParallelResult par =
          run_thread_parallel(domain, inst.start, b, small_grid(SearchMode::kAllSolutions));
      CHECK(par.outcome.cost == seq.cost);
      CHECK(par.outcome.nodes_expanded == seq.nodes_expanded);
      REQUIRE(par.iterations.size() == seq.iterations.size());
      for (std::size_t i = 0; i < seq.iterations.size(); ++i) {
        CHECK(par.iterations[i].limit == seq.iterations[i].limit);
        CHECK(par.iterations[i].expanded == seq.iterations[i].expanded);
      }
      CHECK(path_set(par.outcome.solutions) == path_set(seq.solutions));
      CHECK(par.outcome.solutions.size() == seq.solutions.size());
    }
  }
}

TEST_CASE("FirstSolution: identical non-final iterations, optimal cost") {
  const Domain domain(4);
  for (ThreadBalancing b : {ThreadBalancing::kNone, ThreadBalancing::kStatic, ThreadBalancing::kFull}) {
    for (std::uint32_t seed = 40; seed < 46; ++seed) {
      const PuzzleState start = scramble(seed, 36);
      const SearchOutcome seq = ida_star(domain, start, SearchMode::kFirstSolution);
      const ParallelResult par = run_thread_parallel(domain, start, b, {});
      CHECK(par.outcome.cost == seq.cost);
      REQUIRE(par.outcome.solutions.size() == 1);
      CHECK(replay(start, par.outcome.solutions[0]) == std::optional<PuzzleState>(domain.goal));
      REQUIRE(par.iterations.size() == seq.iterations.size());
      for (std::size_t i = 0; i + 1 < seq.iterations.size(); ++i) {
        CHECK(par.iterations[i].expanded == seq.iterations[i].expanded);
      }
    }
  }
}

TEST_CASE("PFull rebalances respect the trigger and cooldown") {
  const Domain domain(4);
  std::size_t events = 0;
  for (std::uint32_t seed = 50; seed < 54; ++seed) {
    const PuzzleState start = scramble(seed, 44);
    ThreadParallelOptions o;
    o.mode = SearchMode::kAllSolutions;
    const ParallelResult r = run_thread_parallel(domain, start, ThreadBalancing::kFull, o);
    for (const auto& it : r.iterations) {
      for (const auto& e : it.rebalances) {
        ++events;
        CHECK(2 * e.since >= e.previous_duration);
        CHECK(static_cast<double>(e.running) < e.threshold);
        CHECK(e.idle > 0);
        CHECK(e.moved >= 1);
        CHECK(e.duration == static_cast<std::uint64_t>(e.moved) + o.sync_cost);
      }
    }
  }
  CHECK(events > 0);
}

TEST_CASE("multi-entry stealing keeps the search exact") {
  const Domain domain(4);
  for (std::uint32_t seed = 60; seed < 63; ++seed) {
    const PuzzleState start = scramble(seed, 34);
    const SearchOutcome seq = ida_star(domain, start, SearchMode::kAllSolutions);
    ThreadParallelOptions o;
    o.mode = SearchMode::kAllSolutions;
    o.multi_entry_steal = true;
    const ParallelResult r = run_thread_parallel(domain, start, ThreadBalancing::kFull, o);
    CHECK(r.outcome.nodes_expanded == seq.nodes_expanded);
    CHECK(path_set(r.outcome.solutions) == path_set(seq.solutions));
  }
}

TEST_CASE("grid_lanes uses explicit blocks or resident capacity") {
  simt::MachineConfig c;
  CHECK(grid_lanes(c) == 48 * 32);
  c.blocks = 3;
  CHECK(grid_lanes(c) == 96);
}
