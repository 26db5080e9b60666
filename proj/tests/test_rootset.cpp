#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <unordered_set>

#include "bpida/oracle.hpp"
#include "bpida/rootset.hpp"
#include "test_util.hpp"

using namespace bpida;

namespace {

/// Expansions under the roots plus interior nodes, at one limit.
std::uint64_t covered(const Domain& domain, const RootSet& roots, int limit) {
  std::uint64_t n = roots.interior_at_most(limit);
  for (const auto& r : roots.entries) {
    if (r.node.f() > limit) continue;
    n += f_limited_dfs(domain, r.node, limit, SearchMode::kAllSolutions, {}, r.prefix)
             .nodes_expanded;
  }
  return n;
}

RootSet with_loads(const std::vector<double>& loads) {
  RootSet rs;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    RootEntry e;
    e.load = loads[i];
    e.origin = i;
    rs.entries.push_back(e);
  }
  return rs;
}

}  // namespace

TEST_CASE("target 1 yields the start state alone") {
  const Domain domain(4);
  const Instance inst = random_instances(4, 1, 1)[0];
  const RootSet rs = create_root_set(domain, inst.start, 1);
  REQUIRE(rs.size() == 1);
  CHECK(rs.entries[0].node.state == inst.start);
  CHECK(rs.entries[0].node.g == 0);
  CHECK(rs.entries[0].prefix.empty());
  CHECK(rs.interior_total() == 0);
}

TEST_CASE("a solved start keeps the goal as a root") {
  const Domain domain(3);
  const RootSet rs = create_root_set(domain, PuzzleState::goal(3), 4);
  REQUIRE(rs.size() >= 1);
  bool has_goal = false;
  for (const auto& r : rs.entries) has_goal = has_goal || r.node.state == domain.goal;
  CHECK(has_goal);
  CHECK(rs.exhausted);
}

TEST_CASE("prefixes replay to their root states") {
  const Domain domain(4);
  for (const auto& inst : random_instances(4, 5, 2)) {
    const RootSet rs = create_root_set(domain, inst.start, 300);
    CHECK(rs.size() >= 300);
    CHECK_FALSE(rs.exhausted);
    for (const auto& r : rs.entries) {
      REQUIRE(r.prefix.size() == r.node.g);
      CHECK(replay(inst.start, r.prefix) == std::optional<PuzzleState>(r.node.state));
      CHECK(r.node.h == domain.h(r.node.state));
      CHECK(r.load == 1.0);
    }
  }
}

TEST_CASE("cheapest path through the roots equals the optimum") {
  const Domain domain(3);
  const BfsOracle oracle(domain.goal);
  for (const auto& inst : random_instances(3, 30, 3)) {
    const RootSet rs = create_root_set(domain, inst.start, 32);
    int best = kInfiniteCost;
    for (const auto& r : rs.entries) {
      best = std::min(best, r.node.g + oracle.lookup(r.node.state)->distance);
    }
    CHECK(best == oracle.lookup(inst.start)->distance);
  }
}

TEST_CASE("roots plus interior cover the sequential tree at every limit") {
  const Domain domain(3);
  for (const auto& inst : random_instances(3, 25, 4)) {
    RootSet rs = create_root_set(domain, inst.start, 16);
    const auto seq = testutil::brute_ida(inst.start);
    for (const auto& [limit, expanded] : seq) CHECK(covered(domain, rs, limit) == expanded);

    // Same after a split pass driven by uneven loads.
    std::vector<double> loads(rs.size(), 1.0);
    loads[0] = 50.0;
    loads[rs.size() / 2] = 20.0;
    update_root_set(domain, rs, loads);
    for (const auto& [limit, expanded] : seq) CHECK(covered(domain, rs, limit) == expanded);
  }
}

TEST_CASE("equal loads leave the root set unchanged") {
  const Domain domain(4);
  const Instance inst = random_instances(4, 1, 5)[0];
  RootSet rs = create_root_set(domain, inst.start, 40);
  const auto before = rs.entries;
  const std::vector<double> loads(rs.size(), 7.0);
  const UpdateStats st = update_root_set(domain, rs, loads);
  CHECK(st.roots_split == 0);
  REQUIRE(rs.size() == before.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(rs.entries[i].node.state == before[i].node.state);
    CHECK(rs.entries[i].load == 7.0);
  }
}

TEST_CASE("a heavy root splits into at least ceil(load/mean) equal shares") {
  const Domain domain(4);
  const Instance inst = random_instances(4, 1, 6)[0];
  RootSet rs = create_root_set(domain, inst.start, 4);
  rs.entries.resize(4);
  const auto tail = std::vector<RootEntry>(rs.entries.begin() + 1, rs.entries.end());
  const std::vector<double> loads{100, 20, 20, 20};
  const UpdateStats st = update_root_set(domain, rs, loads);
  CHECK(st.average_load == doctest::Approx(40.0));
  CHECK(st.roots_split == 1);
  const std::size_t children = rs.size() - 3;
  CHECK(children >= 3);
  for (std::size_t i = 0; i < children; ++i) {
    CHECK(rs.entries[i].load == doctest::Approx(100.0 / static_cast<double>(children)));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rs.entries[children + i].node.state == tail[i].node.state);
    CHECK(rs.entries[children + i].load == 20.0);
  }
}

TEST_CASE("splitting strictly increases the root count") {
  const Domain domain(4);
  std::mt19937 rng(7);
  for (const auto& inst : random_instances(4, 10, 8)) {
    RootSet rs = create_root_set(domain, inst.start, 24);
    std::vector<double> loads(rs.size());
    for (auto& l : loads) l = 1.0 + static_cast<double>(rng() % 500);
    const std::size_t before = rs.size();
    const UpdateStats st = update_root_set(domain, rs, loads);
    if (st.roots_split > 0) CHECK(rs.size() > before);
    CHECK(st.roots_after == rs.size());
  }
}

TEST_CASE("update_root_set requires one load per root") {
  const Domain domain(3);
  RootSet rs = create_root_set(domain, random_instances(3, 1, 9)[0].start, 8);
  const std::vector<double> loads(rs.size() + 1, 1.0);
  CHECK_THROWS_AS(update_root_set(domain, rs, loads), std::invalid_argument);
  CHECK_THROWS_AS(create_root_set(domain, domain.goal, 0), std::invalid_argument);
}

TEST_CASE("closed dedup leaves no duplicate states") {
  const Domain domain(4);
  RootSetOptions opts;
  opts.closed_dedup = true;
  for (const auto& inst : random_instances(4, 5, 10)) {
    RootSet rs = create_root_set(domain, inst.start, 500, opts);
    std::unordered_set<PuzzleState, PuzzleStateHash> seen;
    for (const auto& r : rs.entries) CHECK(seen.insert(r.node.state).second);
    std::vector<double> loads(rs.size(), 1.0);
    for (std::size_t i = 0; i < loads.size(); i += 5) loads[i] = 40.0;
    update_root_set(domain, rs, loads, opts);
    seen.clear();
    for (const auto& r : rs.entries) CHECK(seen.insert(r.node.state).second);
  }
}

TEST_CASE("assign_roots: equal loads, one root per worker") {
  const auto a = assign_roots(with_loads({1, 1, 1, 1}), 4);
  REQUIRE(a.size() == 4);
  for (std::size_t w = 0; w < 4; ++w) CHECK(a[w] == std::vector<std::size_t>{w});
}

TEST_CASE("assign_roots: heavy first root fills a worker") {
  const auto a = assign_roots(with_loads({3, 1, 1, 1}), 2);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == std::vector<std::size_t>{0});
  CHECK(a[1] == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("assign_roots covers each root once, in order") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> loads(1 + rng() % 60);
    for (auto& l : loads) l = 1.0 + static_cast<double>(rng() % 100);
    const std::size_t workers = 1 + rng() % 16;
    const auto a = assign_roots(with_loads(loads), workers);
    REQUIRE(a.size() == workers);
    std::vector<std::size_t> flat;
    for (const auto& w : a) flat.insert(flat.end(), w.begin(), w.end());
    REQUIRE(flat.size() == loads.size());
    for (std::size_t i = 0; i < flat.size(); ++i) CHECK(flat[i] == i);
  }
  CHECK_THROWS_AS(assign_roots(with_loads({1}), 0), std::invalid_argument);
}
