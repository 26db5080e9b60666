#include "bpida/rootset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace bpida {

std::uint64_t RootSet::interior_at_most(int limit) const {
  std::uint64_t n = 0;
  for (auto it = interior_f_.begin(); it != interior_f_.end() && it->first <= limit; ++it) {
    n += it->second;
  }
  return n;
}

int RootSet::interior_min_above(int limit) const {
  const auto it = interior_f_.upper_bound(limit);
  return it == interior_f_.end() ? kInfiniteCost : it->first;
}

std::uint64_t RootSet::interior_total() const {
  std::uint64_t n = 0;
  for (const auto& [f, count] : interior_f_) n += count;
  return n;
}

int RootSet::min_f() const {
  int best = kInfiniteCost;
  for (const auto& e : entries) best = std::min(best, e.node.f());
  return best;
}

namespace {

/// Best-first frontier growth shared by construction and splitting.
class FrontierExpander {
 public:
  FrontierExpander(const Domain& domain, RootSet& roots, bool dedup,
                   std::unordered_map<PuzzleState, int, PuzzleStateHash>* seen)
      : domain_(domain), roots_(roots), dedup_(dedup), seen_(seen) {}

  std::vector<RootEntry> run(RootEntry seed, std::size_t target) {
    pool_.clear();
    held_.clear();
    open_ = {};
    live_open_ = 0;
    open_states_.clear();
    push(std::move(seed));
    while (live_open_ + held_.size() < target && !open_.empty()) {
      const auto [f, h, origin, index] = open_.top();
      open_.pop();
      RootEntry& entry = pool_[index];
      if (stale(entry)) continue;
      --live_open_;
      if (dedup_) open_states_.erase(entry.node.state);
      if (domain_.is_goal(entry.node.state)) {
        held_.push_back(index);
        continue;
      }
      expand(index);
    }
    std::vector<std::size_t> keep = held_;
    while (!open_.empty()) {
      const std::size_t index = std::get<3>(open_.top());
      open_.pop();
      if (!stale(pool_[index])) keep.push_back(index);
    }
    std::sort(keep.begin(), keep.end(),
              [&](std::size_t a, std::size_t b) { return pool_[a].origin < pool_[b].origin; });
    std::vector<RootEntry> out;
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push_back(std::move(pool_[i]));
    return out;
  }

 private:
  // (f, h, origin, pool index); min-heap via greater<>.
  using Key = std::tuple<int, int, std::uint64_t, std::size_t>;

  bool stale(const RootEntry& e) const {
    if (!dedup_) return false;
    const auto it = seen_->find(e.node.state);
    return it != seen_->end() && it->second < e.node.g;
  }

  void push(RootEntry entry) {
    const SearchNode& n = entry.node;
    open_.emplace(n.f(), n.h, entry.origin, pool_.size());
    if (dedup_) open_states_.insert(n.state);
    pool_.push_back(std::move(entry));
    ++live_open_;
  }

  void expand(std::size_t index) {
    const RootEntry parent = pool_[index];
    const SearchNode& node = parent.node;
    roots_.record_interior(node.f());
    for (Direction d : domain_.order) {
      if (domain_.pruned(node.last_op, d) || !node.state.can_apply(d)) continue;
      SearchNode child{node.state.apply_unchecked(d), static_cast<std::uint16_t>(node.g + 1),
                       static_cast<std::uint16_t>(node.h + domain_.table.delta(node.state, d)),
                       d};
      if (dedup_) {
        auto [it, inserted] = seen_->try_emplace(child.state, child.g);
        if (!inserted) {
          if (it->second <= child.g) continue;
          // A cheaper path: a queued copy in this frontier goes stale; a copy
          // elsewhere in the root set is removed after the pass.
          it->second = child.g;
          if (open_states_.erase(child.state) > 0) --live_open_;
        }
      }
      RootEntry entry;
      entry.node = child;
      entry.origin = roots_.next_origin++;
      entry.prefix = parent.prefix;
      entry.prefix.push_back(d);
      push(std::move(entry));
    }
  }

  const Domain& domain_;
  RootSet& roots_;
  bool dedup_;
  std::unordered_map<PuzzleState, int, PuzzleStateHash>* seen_;
  std::vector<RootEntry> pool_;
  std::vector<std::size_t> held_;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open_;
  std::size_t live_open_ = 0;
  std::unordered_set<PuzzleState, PuzzleStateHash> open_states_;
};

void drop_dominated_duplicates(RootSet& roots) {
  std::unordered_map<PuzzleState, int, PuzzleStateHash> best;
  for (const auto& e : roots.entries) {
    auto [it, inserted] = best.try_emplace(e.node.state, e.node.g);
    if (!inserted) it->second = std::min(it->second, static_cast<int>(e.node.g));
  }
  std::vector<RootEntry> kept;
  kept.reserve(roots.entries.size());
  for (auto& e : roots.entries) {
    auto it = best.find(e.node.state);
    if (it != best.end() && it->second == e.node.g) {
      kept.push_back(std::move(e));
      best.erase(it);
    }
  }
  roots.entries = std::move(kept);
}

}  // namespace

RootSet create_root_set(const Domain& domain, const PuzzleState& start,
                        std::size_t target_count, const RootSetOptions& options) {
  if (target_count == 0) throw std::invalid_argument("target_count must be >= 1");
  RootSet roots;
  std::unordered_map<PuzzleState, int, PuzzleStateHash> seen;
  RootEntry seed;
  seed.node = SearchNode::root(domain, start);
  seed.origin = roots.next_origin++;
  if (options.closed_dedup) seen.emplace(start, 0);
  FrontierExpander expander(domain, roots, options.closed_dedup, &seen);
  roots.entries = expander.run(std::move(seed), target_count);
  roots.exhausted = roots.entries.size() < target_count;
  for (auto& e : roots.entries) e.load = 1.0;
  return roots;
}

UpdateStats update_root_set(const Domain& domain, RootSet& roots, std::span<const double> loads,
                            const RootSetOptions& options) {
  if (loads.size() != roots.entries.size()) {
    throw std::invalid_argument("update_root_set: one load per root required");
  }
  UpdateStats stats;
  stats.roots_before = roots.entries.size();
  if (roots.entries.empty()) return stats;

  for (std::size_t i = 0; i < loads.size(); ++i) {
    roots.entries[i].load = std::max(loads[i], 1.0);
  }
  double total = 0.0;
  for (const auto& e : roots.entries) total += e.load;
  // Fixed for the whole pass.
  const double average = total / static_cast<double>(roots.entries.size());
  stats.average_load = average;

  std::unordered_map<PuzzleState, int, PuzzleStateHash> seen;
  if (options.closed_dedup) {
    for (const auto& e : roots.entries) {
      auto [it, inserted] = seen.try_emplace(e.node.state, e.node.g);
      if (!inserted) it->second = std::min(it->second, static_cast<int>(e.node.g));
    }
  }
  FrontierExpander expander(domain, roots, options.closed_dedup, &seen);

  std::vector<RootEntry> next;
  next.reserve(roots.entries.size());
  for (auto& entry : roots.entries) {
    if (entry.load <= average) {
      next.push_back(std::move(entry));
      continue;
    }
    const auto target = static_cast<std::size_t>(std::ceil(entry.load / average));
    const double load = entry.load;
    auto droots = expander.run(entry, target);
    if (droots.size() <= 1) {
      // Goal or dead end; nothing to split.
      next.push_back(droots.empty() ? std::move(entry) : std::move(droots.front()));
      next.back().load = load;
      continue;
    }
    ++stats.roots_split;
    const double share = load / static_cast<double>(droots.size());
    for (auto& child : droots) {
      child.load = share;
      next.push_back(std::move(child));
    }
  }
  roots.entries = std::move(next);
  if (options.closed_dedup) drop_dominated_duplicates(roots);
  stats.roots_after = roots.entries.size();
  return stats;
}

std::vector<std::vector<std::size_t>> assign_roots(const RootSet& roots, std::size_t worker_count) {
  if (worker_count == 0) throw std::invalid_argument("worker_count must be >= 1");
  std::vector<std::vector<std::size_t>> out(worker_count);
  double total = 0.0;
  for (const auto& e : roots.entries) total += e.load;
  const double target = total / static_cast<double>(worker_count);
  std::size_t worker = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < roots.entries.size(); ++i) {
    out[worker].push_back(i);
    sum += roots.entries[i].load;
    if (sum >= target && worker + 1 < worker_count) {
      ++worker;
      sum = 0.0;
    }
  }
  return out;
}

}  // namespace bpida
