#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "bpida/block_parallel.hpp"
#include "bpida/errors.hpp"
#include "bpida/oracle.hpp"
#include "bpida/shared_stack.hpp"
#include "lin_check.hpp"
#include "test_util.hpp"

using namespace bpida;

namespace {

BlockParallelOptions small_grid(SearchMode mode) {
  BlockParallelOptions o;
  o.mode = mode;
  o.machine.sm_count = 2;
  o.machine.warp_slots_per_sm = 2;
  return o;
}

std::set<std::string> path_set(const std::vector<Path>& paths) {
  std::set<std::string> out;
  for (const auto& p : paths) out.insert(to_string(p));
  return out;
}

}  // namespace

TEST_CASE("parallel pop plan follows the min rule") {
  const PopPlan a = plan_parallel_pop(12, 32);
  CHECK(a.popped == 8);
  CHECK(a.masked_lanes == 0);
  const PopPlan b = plan_parallel_pop(3, 32);
  CHECK(b.popped == 3);
  CHECK(b.masked_lanes == 20);
  const PopPlan c = plan_parallel_pop(0, 32);
  CHECK(c.popped == 0);
  CHECK(c.masked_lanes == 32);
  CHECK_THROWS_AS(plan_parallel_pop(5, 30), ConfigError);
  CHECK_THROWS_AS(plan_parallel_pop(5, 2), ConfigError);
}

TEST_CASE("a goal root is found in the first repetition") {
  const Domain domain(3);
  BlockParallelOptions o;
  o.machine.blocks = 1;
  o.root_target = 1;
  const ParallelResult r = run_bpida(domain, domain.goal, o);
  CHECK(r.outcome.found);
  CHECK(r.outcome.cost == 0);
  REQUIRE(r.iterations.size() == 1);
  CHECK(r.iterations[0].limit == 0);
  CHECK(r.iterations[0].repetitions == 1);
}

TEST_CASE("one block on the 8-puzzle matches sequential per limit") {
  const Domain domain(3);
  for (const auto& inst : random_instances(3, 30, 41)) {
    BlockParallelOptions o;
    o.mode = SearchMode::kAllSolutions;
    o.machine.blocks = 1;
    o.root_target = 1;
    o.static_balancing = false;
    const ParallelResult r = run_bpida(domain, inst.start, o);
    const SearchOutcome seq = ida_star(domain, inst.start, SearchMode::kAllSolutions);
    REQUIRE(r.iterations.size() == seq.iterations.size());
    for (std::size_t i = 0; i < seq.iterations.size(); ++i) {
      CHECK(r.iterations[i].limit == seq.iterations[i].limit);
      CHECK(r.iterations[i].expanded == seq.iterations[i].expanded);
      if (i + 1 < seq.iterations.size()) CHECK(r.iterations[i].f_next == seq.iterations[i].f_next);
      // Each repetition pops at most lanes / 4 nodes.
      CHECK(r.iterations[i].repetitions * 8 >= r.iterations[i].expanded);
    }
    CHECK(path_set(r.outcome.solutions) == path_set(seq.solutions));
  }
}

TEST_CASE("many blocks: AllSolutions totals and paths match sequential") {
  const Domain domain(3);
  for (const auto& inst : random_instances(3, 25, 42)) {
    const ParallelResult r = run_bpida(domain, inst.start, small_grid(SearchMode::kAllSolutions));
    const SearchOutcome seq = ida_star(domain, inst.start, SearchMode::kAllSolutions);
    CHECK(r.outcome.nodes_expanded == seq.nodes_expanded);
    REQUIRE(r.iterations.size() == seq.iterations.size());
    for (std::size_t i = 0; i < seq.iterations.size(); ++i) {
      CHECK(r.iterations[i].expanded == seq.iterations[i].expanded);
    }
    CHECK(r.outcome.solutions.size() == seq.solutions.size());
    CHECK(path_set(r.outcome.solutions) == path_set(seq.solutions));
  }
}

TEST_CASE("FirstSolution returns the lexicographically smallest cheapest path") {
  const Domain domain(3);
  for (const auto& inst : random_instances(3, 25, 43)) {
    const ParallelResult r = run_bpida(domain, inst.start, small_grid(SearchMode::kFirstSolution));
    const SearchOutcome seq = ida_star(domain, inst.start, SearchMode::kFirstSolution);
    CHECK(r.outcome.cost == seq.cost);
    REQUIRE(r.outcome.solutions.size() == 1);
    CHECK(replay(inst.start, r.outcome.solutions[0]) == std::optional<PuzzleState>(domain.goal));
    const ParallelResult again = run_bpida(domain, inst.start, small_grid(SearchMode::kFirstSolution));
    CHECK(again.outcome.solutions == r.outcome.solutions);
  }
}

TEST_CASE("repetition count grows with the subtree") {
  // Raising the limit only adds nodes to the same tree; repetitions for the
  // bigger tree are never fewer.
  const Domain domain(4);
  std::mt19937 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    PuzzleState s = domain.goal;
    for (int m = 0; m < 60; ++m) {
      const auto d = static_cast<Direction>(rng() % 4);
      if (s.can_apply(d)) s = s.apply_unchecked(d);
    }
    BlockParallelOptions o;
    o.mode = SearchMode::kAllSolutions;
    o.machine.blocks = 1;
    o.root_target = 1;
    o.static_balancing = false;
    const ParallelResult r = run_bpida(domain, s, o);
    for (std::size_t i = 0; i + 1 < r.iterations.size(); ++i) {
      CHECK(r.iterations[i + 1].expanded >= r.iterations[i].expanded);
      CHECK(r.iterations[i + 1].repetitions >= r.iterations[i].repetitions);
    }
  }
}

TEST_CASE("undersized shared stack raises StackOverflow") {
  const Domain domain(4);
  const Instance inst = random_instances(4, 1, 44)[0];
  BlockParallelOptions o;
  o.stack_capacity = 4;
  o.machine.blocks = 1;
  o.root_target = 1;
  CHECK_THROWS_AS(run_bpida(domain, inst.start, o), StackOverflow);
}

TEST_CASE("lanes per block must equal the warp size") {
  const Domain domain(3);
  BlockParallelOptions o;
  o.machine.lanes_per_block = 64;
  CHECK_THROWS_AS(run_bpida(domain, domain.goal, o), ConfigError);
}

TEST_CASE("SharedStack: capacity, order and all-or-nothing batches") {
  CHECK_THROWS_AS(SharedStack<int>(0), ConfigError);
  SharedStack<int> s(5);
  const std::vector<int> first{1, 2, 3};
  s.atomic_put_batch(first);
  const std::vector<int> too_many{4, 5, 6};
  CHECK_THROWS_AS(s.atomic_put_batch(too_many), StackOverflow);
  CHECK(s.size() == 3);
  s.atomic_put(4);
  s.atomic_put(5);
  CHECK_THROWS_AS(s.atomic_put(6), StackOverflow);
  std::vector<int> out;
  CHECK(s.parallel_pop(2, out) == 2);
  CHECK(out == std::vector<int>{5, 4});
  CHECK(s.parallel_pop(10, out) == 3);
  CHECK(out == std::vector<int>{3, 2, 1});
  CHECK(s.parallel_pop(10, out) == 0);
  CHECK(s.empty());
}

TEST_CASE("SharedStack: in-flight accounting") {
  SharedStack<int> s(16);
  s.atomic_put(1);
  std::vector<int> out;
  CHECK(s.pop_work(4, out) == 1);
  CHECK(s.empty());
  CHECK_FALSE(s.quiescent());
  const std::vector<int> kids{2, 3};
  s.finish_work(1, kids);
  CHECK_FALSE(s.quiescent());
  CHECK(s.pop_work(4, out) == 2);
  s.finish_work(2, {});
  CHECK(s.quiescent());
  CHECK_THROWS_AS(s.finish_work(1, {}), ConfigError);
}

TEST_CASE("SharedStack: pop-then-put round trip keeps the multiset") {
  std::mt19937 rng(5);
  SharedStack<int> s(1000);
  std::multiset<int> expected;
  for (int i = 0; i < 500; ++i) {
    s.atomic_put(i);
    expected.insert(i);
  }
  std::vector<int> out;
  for (int round = 0; round < 200; ++round) {
    s.parallel_pop(1 + rng() % 16, out);
    std::shuffle(out.begin(), out.end(), rng);
    s.atomic_put_batch(out);
  }
  s.parallel_pop(1000, out);
  CHECK(std::multiset<int>(out.begin(), out.end()) == expected);
}

TEST_CASE("linearizability checker accepts real histories and rejects forged ones") {
  const lincheck::Result ok = lincheck::stress(4, 20000, 1);
  INFO(ok.first_violation);
  CHECK(ok.operations == 80000);
  CHECK(ok.violations == 0);

  std::vector<lincheck::Op> forged(2);
  forged[0] = {lincheck::OpKind::kPut, 0, 1, 0, {7}, 0};
  forged[1] = {lincheck::OpKind::kPop, 2, 3, 1, {8}, 1};
  CHECK(lincheck::check(forged, {}).violations > 0);

  // Real-time order broken: the second op finished before the first began.
  std::vector<lincheck::Op> reordered(2);
  reordered[0] = {lincheck::OpKind::kPut, 5, 6, 0, {1}, 0};
  reordered[1] = {lincheck::OpKind::kPut, 1, 2, 1, {2}, 0};
  CHECK(lincheck::check(reordered, {1, 2}).violations > 0);
}

TEST_CASE("PathArena frees records once no entry refers to them") {
  PathArena arena;
  const auto root = arena.allocate(PathArena::kNone, std::nullopt);
  const auto a = arena.allocate(root, Direction::kRight);
  arena.add_ref(root);
  const auto b = arena.allocate(a, Direction::kDown);
  arena.add_ref(a);
  const auto c = arena.allocate(root, Direction::kDown);
  arena.add_ref(root);
  CHECK(arena.path_to(b) == Path{Direction::kRight, Direction::kDown});
  CHECK(arena.path_to(c) == Path{Direction::kDown});
  CHECK(arena.path_to(root).empty());
  CHECK(arena.live() == 4);
  arena.release(b);
  // b and a are gone; root is still held by c.
  CHECK(arena.live() == 2);
  CHECK(arena.path_to(c) == Path{Direction::kDown});
  arena.release(c);
  CHECK(arena.live() == 0);
  const auto d = arena.allocate(PathArena::kNone, std::nullopt);
  CHECK(arena.live() == 1);
  CHECK(d >= 0);
}
