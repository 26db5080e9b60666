#ifndef BPIDA_SHARED_STACK_HPP
#define BPIDA_SHARED_STACK_HPP

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "bpida/errors.hpp"

namespace bpida {

/// Bounded LIFO shared by the lanes of one block. Every operation takes a
/// single mutex, so each has one linearization point inside the critical
/// section; `stamp` (when non-null) receives its position in that order.
///
/// pop_work()/finish_work() add in-flight accounting so concurrent workers
/// can tell an empty stack from a finished search.
template <typename T>
class SharedStack {
 public:
  explicit SharedStack(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("stack capacity must be >= 1");
    items_.reserve(capacity);
  }

  SharedStack(const SharedStack&) = delete;
  SharedStack& operator=(const SharedStack&) = delete;

  std::size_t capacity() const { return capacity_; }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

  bool empty() const { return size() == 0; }

  /// Removes up to `max_count` entries; out[0] is the former top. Returns the
  /// number removed.
  std::size_t parallel_pop(std::size_t max_count, std::vector<T>& out,
                           std::uint64_t* stamp = nullptr) {
    std::lock_guard lock(mutex_);
    return pop_locked(max_count, out, stamp);
  }

  /// Pushes one entry. Throws StackOverflow and leaves the stack unchanged
  /// when full.
  void atomic_put(const T& value, std::uint64_t* stamp = nullptr) {
    std::lock_guard lock(mutex_);
    put_locked(std::span<const T>(&value, 1), stamp);
  }

  /// Pushes `values` in order, so values.back() ends on top. All or nothing.
  void atomic_put_batch(std::span<const T> values, std::uint64_t* stamp = nullptr) {
    std::lock_guard lock(mutex_);
    put_locked(values, stamp);
  }

  /// parallel_pop that also marks the popped entries as in flight.
  std::size_t pop_work(std::size_t max_count, std::vector<T>& out,
                       std::uint64_t* stamp = nullptr) {
    std::lock_guard lock(mutex_);
    const std::size_t n = pop_locked(max_count, out, stamp);
    in_flight_ += n;
    return n;
  }

  /// Publishes children of `count` in-flight entries and retires them in
  /// one critical section.
  void finish_work(std::size_t count, std::span<const T> children,
                   std::uint64_t* stamp = nullptr) {
    std::lock_guard lock(mutex_);
    if (count > in_flight_) throw ConfigError("finish_work: more entries than in flight");
    put_locked(children, stamp);
    in_flight_ -= count;
  }

  /// Empty with nothing in flight: no entry can appear again.
  bool quiescent() const {
    std::lock_guard lock(mutex_);
    return items_.empty() && in_flight_ == 0;
  }

 private:
  std::size_t pop_locked(std::size_t max_count, std::vector<T>& out, std::uint64_t* stamp) {
    const std::size_t n = std::min(max_count, items_.size());
    out.clear();
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(std::move(items_.back()));
      items_.pop_back();
    }
    if (stamp) *stamp = clock_;
    ++clock_;
    return n;
  }

  void put_locked(std::span<const T> values, std::uint64_t* stamp) {
    if (items_.size() + values.size() > capacity_) {
      throw StackOverflow("shared stack capacity " + std::to_string(capacity_) + " exceeded");
    }
    items_.insert(items_.end(), values.begin(), values.end());
    if (stamp) *stamp = clock_;
    ++clock_;
  }

  mutable std::mutex mutex_;
  std::vector<T> items_;
  std::size_t capacity_;
  std::size_t in_flight_ = 0;
  std::uint64_t clock_ = 0;
};

}  // namespace bpida

#endif  // BPIDA_SHARED_STACK_HPP
