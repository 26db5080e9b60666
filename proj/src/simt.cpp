#include "bpida/simt.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <deque>
#include <numeric>

#include "bpida/errors.hpp"

namespace bpida::simt {

void MachineConfig::validate() const {
  if (warp_size < 1 || warp_size > 64) throw ConfigError("warp_size must be in [1, 64]");
  if (lanes_per_block < warp_size || lanes_per_block % warp_size != 0) {
    throw ConfigError("lanes_per_block must be a positive multiple of warp_size");
  }
  if (sm_count < 1) throw ConfigError("sm_count must be >= 1");
  if (warp_slots_per_sm < 1) throw ConfigError("warp_slots_per_sm must be >= 1");
  if (warps_per_block() > warp_slots_per_sm) {
    throw ConfigError("a block needs " + std::to_string(warps_per_block()) +
                      " warp slots but an SM has " + std::to_string(warp_slots_per_sm));
  }
  if (issue_width < 0) throw ConfigError("issue_width must be >= 0");
  if (blocks < 0) throw ConfigError("blocks must be >= 0");
}

StepCounters& StepCounters::operator+=(const StepCounters& other) {
  lane_steps_total += other.lane_steps_total;
  lane_steps_active += other.lane_steps_active;
  sm_ticks_total += other.sm_ticks_total;
  sm_ticks_occupied += other.sm_ticks_occupied;
  ticks += other.ticks;
  if (per_lane_expansions.size() < other.per_lane_expansions.size()) {
    per_lane_expansions.resize(other.per_lane_expansions.size(), 0);
  }
  for (std::size_t i = 0; i < other.per_lane_expansions.size(); ++i) {
    per_lane_expansions[i] += other.per_lane_expansions[i];
  }
  return *this;
}

double load_balance(const std::vector<std::uint64_t>& per_worker) {
  const std::uint64_t total = std::accumulate(per_worker.begin(), per_worker.end(), std::uint64_t{0});
  if (total == 0) throw EmptyRun("no worker expanded any node");
  const std::uint64_t max = *std::max_element(per_worker.begin(), per_worker.end());
  const double mean = static_cast<double>(total) / static_cast<double>(per_worker.size());
  return static_cast<double>(max) / mean;
}

Metrics compute_metrics(const StepCounters& counters) {
  Metrics m;
  m.load_balance = load_balance(counters.per_lane_expansions);
  if (counters.sm_ticks_total > 0) {
    m.sm_efficiency = static_cast<double>(counters.sm_ticks_occupied) /
                      static_cast<double>(counters.sm_ticks_total);
  }
  if (counters.lane_steps_total > 0) {
    m.ipc_proxy = static_cast<double>(counters.lane_steps_active) /
                  static_cast<double>(counters.lane_steps_total);
  }
  return m;
}

void TraceSink::warp_step(std::uint64_t tick, int sm, int block, int warp, std::uint64_t mask) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "{\"tick\":%llu,\"sm\":%d,\"block\":%d,\"warp\":%d,\"mask\":\"%llx\"}\n",
                static_cast<unsigned long long>(tick), sm, block, warp,
                static_cast<unsigned long long>(mask));
  *out_ << buf;
}

void TraceSink::event(std::uint64_t tick, int block, const std::string& kind,
                      const std::string& detail) {
  *out_ << "{\"tick\":" << tick << ",\"block\":" << block << ",\"event\":\"" << kind << '"';
  if (!detail.empty()) *out_ << ",\"detail\":\"" << detail << '"';
  *out_ << "}\n";
}

namespace {

struct Resident {
  std::unique_ptr<BlockProgram> program;
  int block = 0;
};

struct Sm {
  std::vector<Resident> blocks;
  int used_slots = 0;
  std::size_t rr = 0;
};

}  // namespace

MachineRun run_machine(const MachineConfig& config, int block_count, const BlockFactory& factory,
                       TraceSink* trace) {
  config.validate();
  const int wpb = config.warps_per_block();
  const std::uint64_t lanes_per_warp = static_cast<std::uint64_t>(config.warp_size);
  std::vector<Sm> sms(static_cast<std::size_t>(config.sm_count));
  MachineRun run;
  StepCounters& c = run.counters;
  int next_block = 0;
  std::size_t resident_count = 0;
  std::vector<std::pair<Resident*, int>> warps;

  auto retire_done = [&](std::uint64_t tick) {
    for (auto& sm : sms) {
      auto it = std::remove_if(sm.blocks.begin(), sm.blocks.end(), [&](const Resident& r) {
        if (!r.program->done()) return false;
        if (trace) trace->event(tick, r.block, "retire");
        return true;
      });
      const auto removed = static_cast<int>(std::distance(it, sm.blocks.end()));
      sm.blocks.erase(it, sm.blocks.end());
      sm.used_slots -= removed * wpb;
      resident_count -= static_cast<std::size_t>(removed);
    }
  };

  while (true) {
    // Admission, FIFO.
    while (next_block < block_count) {
      Sm* best = nullptr;
      for (auto& sm : sms) {
        const int free = config.warp_slots_per_sm - sm.used_slots;
        if (free >= wpb && (!best || free > config.warp_slots_per_sm - best->used_slots)) {
          best = &sm;
        }
      }
      if (!best) break;
      best->blocks.push_back(Resident{factory(next_block), next_block});
      best->used_slots += wpb;
      ++resident_count;
      if (trace) trace->event(c.ticks, next_block, "admit");
      ++next_block;
    }
    retire_done(c.ticks);
    if (resident_count == 0) {
      if (next_block >= block_count) break;
      continue;
    }

    bool any_issued = false;
    for (std::size_t s = 0; s < sms.size(); ++s) {
      Sm& sm = sms[s];
      warps.clear();
      for (auto& r : sm.blocks) {
        for (int w = 0; w < wpb; ++w) warps.emplace_back(&r, w);
      }
      const std::size_t width = config.issue_width == 0
                                    ? warps.size()
                                    : static_cast<std::size_t>(config.issue_width);
      std::size_t issued = 0;
      std::size_t last = sm.rr;
      const std::size_t n = warps.size();
      const std::size_t start = width >= n ? 0 : sm.rr % n;
      for (std::size_t k = 0; k < n && issued < width; ++k) {
        const std::size_t i = (start + k) % n;
        auto [res, w] = warps[i];
        const WarpIssue wi = res->program->step_warp(w);
        if (!wi.issued) continue;
        ++issued;
        last = i;
        c.lane_steps_total += lanes_per_warp;
        c.lane_steps_active += static_cast<std::uint64_t>(std::popcount(wi.active_mask));
        if (trace) trace->warp_step(c.ticks, static_cast<int>(s), res->block, w, wi.active_mask);
      }
      if (width < n) sm.rr = last + 1;
      if (issued > 0) {
        ++c.sm_ticks_occupied;
        any_issued = true;
      }
    }

    bool halt = false;
    for (auto& sm : sms) {
      for (auto& r : sm.blocks) {
        r.program->end_tick();
        halt = halt || r.program->halt_requested();
      }
    }
    c.sm_ticks_total += static_cast<std::uint64_t>(config.sm_count);
    ++c.ticks;

    if (halt) {
      run.halted = true;
      if (trace) trace->event(c.ticks, -1, "halt");
      break;
    }
    if (!any_issued) {
      bool pending = false;
      for (auto& sm : sms) {
        for (auto& r : sm.blocks) pending = pending || !r.program->done();
      }
      if (pending) throw DeadlockDetected("no warp could issue while blocks remain resident");
    }
  }
  return run;
}

}  // namespace bpida::simt
