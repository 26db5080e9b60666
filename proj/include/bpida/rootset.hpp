#ifndef BPIDA_ROOTSET_HPP
#define BPIDA_ROOTSET_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "bpida/puzzle.hpp"
#include "bpida/search.hpp"

namespace bpida {

struct RootEntry {
  SearchNode node;
  /// Estimated work under this root, from the previous iteration.
  double load = 1.0;
  /// Generation sequence number.
  std::uint64_t origin = 0;
  /// Moves from the start state to node.state; size() == node.g.
  Path prefix;
};

struct RootSetOptions {
  /// Drop generated states already expanded or queued (CLOSED list). Off by
  /// default: the root set then partitions the IDA* tree exactly, which keeps
  /// per-limit node counts identical to the sequential search.
  bool closed_dedup = false;
};

/// Roots plus the interior nodes consumed while building them.
class RootSet {
 public:
  std::vector<RootEntry> entries;
  /// Set when the frontier could not reach the requested size.
  bool exhausted = false;

  std::size_t size() const { return entries.size(); }

  /// Interior nodes (expanded during construction or splitting) with f <= limit.
  std::uint64_t interior_at_most(int limit) const;
  /// Smallest interior f strictly above limit, or kInfiniteCost.
  int interior_min_above(int limit) const;
  std::uint64_t interior_total() const;

  /// Smallest root f.
  int min_f() const;

  void record_interior(int f) { ++interior_f_[f]; }

  std::uint64_t next_origin = 0;

 private:
  std::map<int, std::uint64_t> interior_f_;
};

/// Best-first (f, then lower h, then generation order) expansion from
/// `start` until at least `target_count` frontier states exist. Goals are
/// kept in the frontier unexpanded. Loads start at 1.
RootSet create_root_set(const Domain& domain, const PuzzleState& start,
                        std::size_t target_count, const RootSetOptions& options = {});

struct UpdateStats {
  double average_load = 0.0;
  std::size_t roots_split = 0;
  std::size_t roots_before = 0;
  std::size_t roots_after = 0;
};

/// Static rebalancing between iterations. `loads[i]` is the measured work
/// under entries[i] in the iteration just completed. Every root whose load
/// exceeds the mean is replaced in place by ceil(load / mean) or more
/// frontier nodes of its own subtree, each carrying an equal share.
UpdateStats update_root_set(const Domain& domain, RootSet& roots, std::span<const double> loads,
                            const RootSetOptions& options = {});

/// Greedy assignment in entry order: worker t receives roots until its summed
/// load reaches total / worker_count; the last worker takes the remainder.
/// Returns entry indices per worker.
std::vector<std::vector<std::size_t>> assign_roots(const RootSet& roots, std::size_t worker_count);

}  // namespace bpida

#endif  // BPIDA_ROOTSET_HPP
