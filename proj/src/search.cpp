#include "bpida/search.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>

#include "bpida/errors.hpp"

namespace bpida {

DfsContext::DfsContext(const Domain& domain, int limit, SearchMode mode, std::size_t capacity)
    : domain_(&domain), limit_(limit), mode_(mode), capacity_(capacity) {
  stack_.reserve(capacity);
}

void DfsContext::push_root(const SearchNode& node, std::uint32_t root, Path prefix) {
  assert(stack_.empty());
  assert(prefix.size() == node.g);
  if (capacity_ == 0) throw StackOverflow("DFS stack capacity is zero");
  path_ = std::move(prefix);
  base_g_ = node.g;
  stack_.push_back(Entry{node, root});
}

DfsContext::StepResult DfsContext::step() {
  const Entry entry = stack_.back();
  stack_.pop_back();
  const SearchNode& node = entry.node;

  // Entries below the popped one keep their ancestors' moves intact in
  // path_[0, g-1): everything popped since they were pushed is deeper.
  if (node.g > base_g_) {
    path_.resize(static_cast<std::size_t>(node.g - 1));
    path_.push_back(*node.last_op);
  } else {
    path_.resize(static_cast<std::size_t>(base_g_));
  }

  ++expanded_;
  StepResult result{true, false, entry.root};
  assert(node.state.is_valid());

  if (domain_->is_goal(node.state)) {
    solutions_.push_back(path_);
    result.goal = true;
    return result;
  }

  const auto& order = domain_->order;
  // Push in reverse so children pop in operator order.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Direction d = *it;
    if (domain_->pruned(node.last_op, d) || !node.state.can_apply(d)) continue;
    ++generated_;
    const int h = node.h + domain_->table.delta(node.state, d);
    const int f_new = node.g + 1 + h;
    if (f_new <= limit_) {
      if (stack_.size() >= capacity_) {
        throw StackOverflow("DFS stack exceeded capacity " + std::to_string(capacity_));
      }
      stack_.push_back(Entry{SearchNode{node.state.apply_unchecked(d),
                                        static_cast<std::uint16_t>(node.g + 1),
                                        static_cast<std::uint16_t>(h), d},
                             entry.root});
    } else {
      f_next_ = std::min(f_next_, f_new);
    }
  }
  return result;
}

std::pair<DfsContext::Entry, Path> DfsContext::steal_bottom() {
  assert(!stack_.empty());
  Entry entry = stack_.front();
  stack_.erase(stack_.begin());
  Path prefix;
  if (entry.node.g > base_g_) {
    prefix.assign(path_.begin(), path_.begin() + (entry.node.g - 1));
    prefix.push_back(*entry.node.last_op);
  } else {
    prefix.assign(path_.begin(), path_.begin() + base_g_);
  }
  return {entry, std::move(prefix)};
}

SearchOutcome f_limited_dfs(const Domain& domain, const SearchNode& root, int limit,
                            SearchMode mode, const DfsOptions& options, Path prefix) {
  if (prefix.size() != root.g) {
    throw std::invalid_argument("root prefix length must equal root g");
  }
  SearchOutcome out;
  DfsContext ctx(domain, limit, mode, options.stack_capacity);
  ctx.push_root(root, 0, std::move(prefix));
  while (!ctx.empty()) {
    const auto r = ctx.step();
    if (r.goal && mode == SearchMode::kFirstSolution) break;
  }
  out.nodes_expanded = ctx.expanded();
  out.nodes_generated = ctx.generated();
  out.solutions = ctx.solutions();
  out.found = !out.solutions.empty();
  if (out.found) {
    out.cost = static_cast<int>(out.solutions.front().size());
  } else {
    out.f_next = ctx.f_next();
  }
  out.iterations.push_back(IterationStats{limit, ctx.expanded(), ctx.generated(),
                                          out.found ? kInfiniteCost : ctx.f_next()});
  return out;
}

SearchOutcome ida_star(const Domain& domain, const PuzzleState& start, SearchMode mode,
                       const IdaOptions& options) {
  SearchOutcome total;
  const SearchNode root = SearchNode::root(domain, start);
  int limit = root.f();
  while (true) {
    if (limit > options.max_limit) {
      throw IterationLimit("f-limit " + std::to_string(limit) + " exceeds maximum " +
                           std::to_string(options.max_limit));
    }
    SearchOutcome it = f_limited_dfs(domain, root, limit, mode, options.dfs);
    total.nodes_expanded += it.nodes_expanded;
    total.nodes_generated += it.nodes_generated;
    total.iterations.push_back(it.iterations.front());
    if (it.found) {
      total.found = true;
      total.cost = it.cost;
      total.solutions = std::move(it.solutions);
      return total;
    }
    if (it.f_next == kInfiniteCost) {
      total.f_next = kInfiniteCost;
      return total;
    }
    limit = it.f_next;
  }
}

SearchOutcome ida_star(const Instance& instance, SearchMode mode, const IdaOptions& options) {
  Domain domain(instance);
  return ida_star(domain, instance.start, mode, options);
}

std::optional<PuzzleState> replay(const PuzzleState& start, const Path& path) {
  PuzzleState s = start;
  for (Direction d : path) {
    auto next = s.apply(d);
    if (!next) return std::nullopt;
    s = *next;
  }
  return s;
}

bool path_less(const Path& a, const Path& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace bpida
