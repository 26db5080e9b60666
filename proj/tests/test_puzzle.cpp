#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "bpida/errors.hpp"
#include "bpida/oracle.hpp"
#include "bpida/puzzle.hpp"
#include "test_util.hpp"

using namespace bpida;

TEST_CASE("goal layout puts the blank first") {
  const PuzzleState g = PuzzleState::goal(4);
  CHECK(g.blank() == 0);
  for (int i = 0; i < 16; ++i) CHECK(g.tile_at(i) == i);
  CHECK(manhattan(g, g) == 0);
}

TEST_CASE("from_tiles rejects non-permutations") {
  const std::vector<int> dup{0, 1, 1, 3, 4, 5, 6, 7, 8};
  const std::vector<int> short_board{0, 1, 2};
  const std::vector<int> out_of_range{0, 1, 2, 3, 4, 5, 6, 7, 9};
  CHECK_THROWS_AS(PuzzleState::from_tiles(3, dup), MalformedInstance);
  CHECK_THROWS_AS(PuzzleState::from_tiles(3, short_board), MalformedInstance);
  CHECK_THROWS_AS(PuzzleState::from_tiles(3, out_of_range), MalformedInstance);
  const std::vector<int> five(25, 0);
  CHECK_THROWS_AS(PuzzleState::from_tiles(5, five), MalformedInstance);
}

TEST_CASE("instance parsing accepts the documented line forms") {
  const Instance a = parse_instance("7: 1 0 2 3 4 5 6 7 8");
  CHECK(a.id == 7);
  CHECK(a.start.blank() == 1);
  const Instance b = parse_instance("12 14 13 15 7 11 12 9 5 6 0 2 1 4 8 10 3");
  CHECK(b.id == 12);
  CHECK(b.start.side() == 4);
  const Instance c = parse_instance("1,0,2,3,4,5,6,7,8", 3);
  CHECK(c.id == 3);
  CHECK_THROWS_AS(parse_instance("0 2 1 3 4 5 6 7 8"), Unsolvable);
  CHECK_THROWS_AS(parse_instance("0 1 2 x"), MalformedInstance);

  const auto list = parse_instances("# header\n\n1: 1 0 2 3 4 5 6 7 8  # trailing\n0 1 2 3 4 5 6 7 8\n");
  REQUIRE(list.size() == 2);
  CHECK(list[0].id == 1);
  CHECK(list[1].start == PuzzleState::goal(3));
}

TEST_CASE("format_instance round-trips") {
  const auto insts = random_instances(4, 20, 5);
  for (const auto& inst : insts) {
    const Instance back = parse_instance(format_instance(inst));
    CHECK(back.id == inst.id);
    CHECK(back.start == inst.start);
  }
}

TEST_CASE("solvable() matches reachability over all 9! boards") {
  const auto reachable = testutil::all_eight_puzzle_states();
  CHECK(reachable.size() == 181440);
  std::unordered_map<std::uint64_t, bool> in_reach;
  for (const auto& s : reachable) in_reach[s.packed()] = true;
  std::vector<int> tiles(9);
  std::iota(tiles.begin(), tiles.end(), 0);
  const PuzzleState goal = PuzzleState::goal(3);
  std::size_t mismatches = 0;
  do {
    const PuzzleState s = PuzzleState::from_tiles(3, tiles);
    if (solvable(s, goal) != in_reach.count(s.packed()) > 0) ++mismatches;
  } while (std::next_permutation(tiles.begin(), tiles.end()));
  CHECK(mismatches == 0);
}

TEST_CASE("apply and inverse undo each other") {
  std::mt19937 rng(11);
  PuzzleState s = PuzzleState::goal(4);
  for (int step = 0; step < 5000; ++step) {
    const auto d = static_cast<Direction>(rng() % 4);
    if (!s.can_apply(d)) {
      CHECK_FALSE(s.apply(d).has_value());
      continue;
    }
    const PuzzleState n = *s.apply(d);
    CHECK(n.is_valid());
    CHECK(n.blank() == s.target_of(d));
    CHECK(*n.apply(inverse(d)) == s);
    s = n;
  }
}

TEST_CASE("manhattan and its incremental delta agree with a from-scratch count") {
  const PuzzleState goal3 = PuzzleState::goal(3);
  const ManhattanTable table3(goal3);
  std::size_t checked = 0;
  for (const auto& s : testutil::all_eight_puzzle_states()) {
    REQUIRE(manhattan(s, goal3) == testutil::manhattan_reference(s));
    for (Direction d : kDefaultOrder) {
      if (!s.can_apply(d)) continue;
      const PuzzleState n = s.apply_unchecked(d);
      REQUIRE(table3.delta(s, d) == testutil::manhattan_reference(n) - testutil::manhattan_reference(s));
      REQUIRE(manhattan_delta(s, d, goal3) == table3.delta(s, d));
      ++checked;
    }
  }
  CHECK(checked == 483840);

  std::mt19937 rng(3);
  const PuzzleState goal4 = PuzzleState::goal(4);
  const ManhattanTable table4(goal4);
  PuzzleState s = goal4;
  for (int step = 0; step < 100000; ++step) {
    const auto d = static_cast<Direction>(rng() % 4);
    if (!s.can_apply(d)) continue;
    const PuzzleState n = s.apply_unchecked(d);
    REQUIRE(table4.delta(s, d) == testutil::manhattan_reference(n) - testutil::manhattan_reference(s));
    s = n;
  }
}

TEST_CASE("manhattan never exceeds the BFS distance") {
  const BfsOracle oracle(PuzzleState::goal(3));
  CHECK(oracle.size() == 181440);
  CHECK(oracle.max_distance() == 31);
  for (const auto& s : testutil::all_eight_puzzle_states()) {
    const auto e = oracle.lookup(s);
    REQUIRE(e.has_value());
    REQUIRE(manhattan(s, oracle.goal()) <= e->distance);
    // Parity: distance and heuristic always agree mod 2.
    REQUIRE((manhattan(s, oracle.goal()) - e->distance) % 2 == 0);
  }
}

TEST_CASE("BFS path counts satisfy the neighbour recurrence") {
  const BfsOracle oracle(PuzzleState::goal(3));
  for (const auto& s : testutil::all_eight_puzzle_states()) {
    const auto e = *oracle.lookup(s);
    if (e.distance == 0) {
      CHECK(e.optimal_paths == 1);
      continue;
    }
    std::uint64_t sum = 0;
    for (Direction d : kDefaultOrder) {
      if (!s.can_apply(d)) continue;
      const auto n = *oracle.lookup(s.apply_unchecked(d));
      if (n.distance == e.distance - 1) sum += n.optimal_paths;
    }
    REQUIRE(sum == e.optimal_paths);
  }
}

TEST_CASE("random_instances are solvable and reproducible") {
  const auto a = random_instances(3, 50, 99);
  const auto b = random_instances(3, 50, 99);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start == b[i].start);
    CHECK(solvable(a[i].start, a[i].goal));
  }
}
