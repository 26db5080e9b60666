#include "bpida/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bpida/block_parallel.hpp"
#include "bpida/errors.hpp"
#include "bpida/thread_parallel.hpp"

namespace bpida {

namespace {

constexpr std::array<std::string_view, 6> kAlgorithmNames{"seq",     "g1",    "psimple",
                                                          "pstatic", "pfull", "bpida"};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

/// Runs `work(i)` for every index on up to `jobs` threads.
template <typename Fn>
void for_each_index(int jobs, std::size_t count, Fn work) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    try {
      for (std::size_t i = next++; i < count; i = next++) work(i);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = count;
    }
  };
  std::vector<std::jthread> pool;
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
  for (int t = 1; t < threads; ++t) pool.emplace_back(body);
  body();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string_view to_string(Algorithm a) { return kAlgorithmNames[static_cast<std::size_t>(a)]; }

Algorithm parse_algorithm(std::string_view name) {
  for (std::size_t i = 0; i < kAlgorithmNames.size(); ++i) {
    if (kAlgorithmNames[i] == name) return kAllAlgorithms[i];
  }
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected seq, g1, psimple, pstatic, pfull or bpida)");
}

std::vector<Algorithm> parse_algorithms(std::string_view list) {
  if (list == "all") return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::vector<Algorithm> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const std::string_view item = list.substr(pos, comma - pos);
    if (!item.empty()) out.push_back(parse_algorithm(item));
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty algorithm list");
  return out;
}

std::string_view to_string(SearchMode m) {
  return m == SearchMode::kFirstSolution ? "first" : "all";
}

SearchMode parse_mode(std::string_view name) {
  if (name == "first") return SearchMode::kFirstSolution;
  if (name == "all") return SearchMode::kAllSolutions;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected first or all)");
}

int RunResult::final_limit() const {
  return outcome.iterations.empty() ? -1 : outcome.iterations.back().limit;
}

RunResult run_algorithm(const RunSpec& spec, const Instance& instance) {
  Domain domain(instance);
  domain.heuristic_bias = spec.heuristic_bias;
  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();

  ThreadParallelOptions thread_opts;
  thread_opts.machine = spec.machine;
  thread_opts.mode = spec.mode;
  thread_opts.dfs.stack_capacity = spec.dfs_stack_capacity;
  thread_opts.roots = spec.roots;
  thread_opts.trace = spec.trace;

  auto adopt = [&](ParallelResult&& r) {
    result.outcome = std::move(r.outcome);
    result.totals = std::move(r.totals);
    result.metrics = r.metrics;
    result.has_load_balance = r.iterations.size() >= 2 && r.metrics.load_balance > 0.0;
    result.machine_metrics = !spec.real_parallel;
    for (const auto& it : r.iterations) result.repetitions += it.repetitions;
    result.simulated_steps = result.totals.ticks;
    result.iterations = std::move(r.iterations);
  };

  switch (spec.algorithm) {
    case Algorithm::kSeq: {
      IdaOptions opts;
      opts.dfs.stack_capacity = spec.dfs_stack_capacity;
      result.outcome = ida_star(domain, instance.start, spec.mode, opts);
      result.simulated_steps = result.outcome.nodes_expanded;
      break;
    }
    case Algorithm::kG1: {
      if (spec.real_parallel) {
        ThreadParallelOptions single = thread_opts;
        single.machine.blocks = 1;
        single.machine.lanes_per_block = single.machine.warp_size;
        single.root_target = 1;
        adopt(execute_thread_parallel(domain, instance.start, ThreadBalancing::kNone, single,
                                      spec.executor));
      } else {
        adopt(run_g1(domain, instance.start, thread_opts));
      }
      break;
    }
    case Algorithm::kPSimple:
    case Algorithm::kPStatic:
    case Algorithm::kPFull: {
      const ThreadBalancing balancing = spec.algorithm == Algorithm::kPSimple ? ThreadBalancing::kNone
                                        : spec.algorithm == Algorithm::kPStatic
                                            ? ThreadBalancing::kStatic
                                            : ThreadBalancing::kFull;
      adopt(spec.real_parallel ? execute_thread_parallel(domain, instance.start, balancing,
                                                         thread_opts, spec.executor)
                               : run_thread_parallel(domain, instance.start, balancing, thread_opts));
      break;
    }
    case Algorithm::kBpida: {
      if (spec.machine.lanes_per_block != spec.machine.warp_size) {
        throw ConfigError("bpida requires lanes_per_block == warp_size");
      }
      BlockParallelOptions opts;
      opts.machine = spec.machine;
      opts.mode = spec.mode;
      opts.roots = spec.roots;
      opts.stack_capacity = spec.block_stack_capacity;
      opts.trace = spec.trace;
      adopt(spec.real_parallel ? execute_bpida(domain, instance.start, opts, spec.executor)
                               : run_bpida(domain, instance.start, opts));
      break;
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

InstanceRow make_row(const RunSpec& spec, const Instance& instance, const RunResult& result) {
  InstanceRow row;
  row.algorithm = spec.algorithm;
  row.mode = spec.mode;
  row.id = instance.id;
  row.cost = result.outcome.found ? result.outcome.cost : -1;
  row.nodes_expanded = result.outcome.nodes_expanded;
  row.iterations = static_cast<int>(result.outcome.iterations.size());
  row.repetitions = result.repetitions;
  if (result.has_load_balance) row.load_balance = result.metrics.load_balance;
  if (result.machine_metrics) {
    row.sm_efficiency = result.metrics.sm_efficiency;
    row.ipc_proxy = result.metrics.ipc_proxy;
  }
  row.simulated_steps = result.simulated_steps;
  row.solutions = result.outcome.solutions.size();
  row.wall_seconds = result.wall_seconds;
  return row;
}

std::vector<Algorithm> Report::algorithms() const {
  std::vector<Algorithm> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.algorithm) == out.end()) out.push_back(r.algorithm);
  }
  return out;
}

std::vector<MetricSummary> Report::summarize(Algorithm algorithm, bool wall_time) const {
  using Getter = std::optional<double> (*)(const InstanceRow&);
  std::vector<std::pair<std::string, Getter>> metrics{
      {"cost", [](const InstanceRow& r) -> std::optional<double> { return r.cost; }},
      {"nodes_expanded",
       [](const InstanceRow& r) -> std::optional<double> {
         return static_cast<double>(r.nodes_expanded);
       }},
      {"iterations", [](const InstanceRow& r) -> std::optional<double> { return r.iterations; }},
      {"repetitions",
       [](const InstanceRow& r) -> std::optional<double> {
         return static_cast<double>(r.repetitions);
       }},
      {"load_balance", [](const InstanceRow& r) { return r.load_balance; }},
      {"sm_efficiency", [](const InstanceRow& r) { return r.sm_efficiency; }},
      {"ipc_proxy", [](const InstanceRow& r) { return r.ipc_proxy; }},
      {"simulated_steps",
       [](const InstanceRow& r) -> std::optional<double> {
         return static_cast<double>(r.simulated_steps);
       }},
  };
  if (wall_time) {
    metrics.emplace_back("wall_seconds",
                         [](const InstanceRow& r) -> std::optional<double> { return r.wall_seconds; });
  }
  std::vector<MetricSummary> out;
  for (const auto& [name, get] : metrics) {
    MetricSummary s;
    s.metric = name;
    std::vector<double> values;
    for (const auto& r : rows) {
      if (r.algorithm != algorithm) continue;
      if (auto v = get(r)) values.push_back(*v);
    }
    s.count = values.size();
    if (!values.empty()) {
      s.min = *std::min_element(values.begin(), values.end());
      s.max = *std::max_element(values.begin(), values.end());
      for (double v : values) s.total += v;
      s.mean = s.total / static_cast<double>(values.size());
      double sq = 0.0;
      for (double v : values) sq += (v - s.mean) * (v - s.mean);
      s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    }
    out.push_back(s);
  }
  return out;
}

Report run_suite(const RunSpec& spec, const std::vector<Instance>& instances) {
  Report report;
  report.rows.resize(instances.size());
  // A shared trace would interleave; tracing forces a single job.
  const int jobs = spec.trace ? 1 : spec.jobs;
  for_each_index(jobs, instances.size(), [&](std::size_t i) {
    report.rows[i] = make_row(spec, instances[i], run_algorithm(spec, instances[i]));
  });
  return report;
}

namespace {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "algorithm",    "mode",          "id",        "cost",
      "nodes_expanded", "iterations",  "repetitions", "load_balance",
      "sm_efficiency", "ipc_proxy",    "simulated_steps", "solutions"};
  return cols;
}

std::vector<std::string> row_fields(const InstanceRow& r, const OutputOptions& options) {
  std::vector<std::string> f{std::string(to_string(r.algorithm)),
                             std::string(to_string(r.mode)),
                             std::to_string(r.id),
                             std::to_string(r.cost),
                             std::to_string(r.nodes_expanded),
                             std::to_string(r.iterations),
                             std::to_string(r.repetitions),
                             optional_field(r.load_balance),
                             optional_field(r.sm_efficiency),
                             optional_field(r.ipc_proxy),
                             std::to_string(r.simulated_steps),
                             std::to_string(r.solutions)};
  if (options.wall_time) f.push_back(format_double(r.wall_seconds));
  return f;
}

/// Aggregate rows in the same column layout as instance rows.
std::vector<std::vector<std::string>> aggregate_fields(const Report& report, Algorithm a,
                                                       SearchMode mode,
                                                       const OutputOptions& options) {
  const auto summaries = report.summarize(a, options.wall_time);
  std::map<std::string, MetricSummary> by_name;
  for (const auto& s : summaries) by_name[s.metric] = s;
  std::vector<std::vector<std::string>> out;
  for (const char* stat : {"mean", "min", "max", "stddev", "total"}) {
    auto pick = [&](const std::string& metric) -> std::string {
      const auto& s = by_name.at(metric);
      if (s.count == 0) return {};
      const std::string st = stat;
      const double v = st == "mean"  ? s.mean
                       : st == "min" ? s.min
                       : st == "max" ? s.max
                       : st == "stddev" ? s.stddev
                                        : s.total;
      return format_double(v);
    };
    std::vector<std::string> f{std::string(to_string(a)), std::string(to_string(mode)), stat,
                               pick("cost"), pick("nodes_expanded"), pick("iterations"),
                               pick("repetitions"), pick("load_balance"),
                               pick("sm_efficiency"), pick("ipc_proxy"),
                               pick("simulated_steps"), std::string{}};
    if (options.wall_time) f.push_back(pick("wall_seconds"));
    out.push_back(std::move(f));
  }
  return out;
}

void write_line(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

SearchMode mode_of(const Report& report, Algorithm a) {
  for (const auto& r : report.rows) {
    if (r.algorithm == a) return r.mode;
  }
  return SearchMode::kFirstSolution;
}

}  // namespace

void write_csv(const Report& report, std::ostream& out, const OutputOptions& options) {
  auto header = csv_columns();
  if (options.wall_time) header.push_back("wall_seconds");
  write_line(out, header);
  for (const auto& r : report.rows) write_line(out, row_fields(r, options));
  for (Algorithm a : report.algorithms()) {
    for (const auto& f : aggregate_fields(report, a, mode_of(report, a), options)) {
      write_line(out, f);
    }
  }
}

void write_json(const Report& report, std::ostream& out, const OutputOptions& options) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json j;
    j["algorithm"] = std::string(to_string(r.algorithm));
    j["mode"] = std::string(to_string(r.mode));
    j["id"] = r.id;
    j["cost"] = r.cost;
    j["nodes_expanded"] = r.nodes_expanded;
    j["iterations"] = r.iterations;
    j["repetitions"] = r.repetitions;
    auto opt = [](const std::optional<double>& v) -> ordered_json {
      return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    j["load_balance"] = opt(r.load_balance);
    j["sm_efficiency"] = opt(r.sm_efficiency);
    j["ipc_proxy"] = opt(r.ipc_proxy);
    j["simulated_steps"] = r.simulated_steps;
    j["solutions"] = r.solutions;
    if (options.wall_time) j["wall_seconds"] = r.wall_seconds;
    doc["rows"].push_back(std::move(j));
  }
  doc["aggregates"] = ordered_json::array();
  for (Algorithm a : report.algorithms()) {
    for (const auto& s : report.summarize(a, options.wall_time)) {
      if (s.count == 0) continue;
      doc["aggregates"].push_back(ordered_json{{"algorithm", std::string(to_string(a))},
                                               {"metric", s.metric},
                                               {"count", s.count},
                                               {"mean", s.mean},
                                               {"min", s.min},
                                               {"max", s.max},
                                               {"stddev", s.stddev},
                                               {"total", s.total}});
    }
  }
  out << doc.dump(2) << '\n';
}

void write_table(const Report& report, std::ostream& out, const OutputOptions& options) {
  out << std::left << std::setw(8) << "algo" << std::setw(6) << "mode" << std::right
      << std::setw(5) << "id" << std::setw(6) << "cost" << std::setw(14) << "nodes"
      << std::setw(6) << "iter" << std::setw(11) << "reps" << std::setw(9) << "lb"
      << std::setw(8) << "sm_eff" << std::setw(7) << "ipc" << std::setw(12) << "steps";
  if (options.wall_time) out << std::setw(10) << "wall_s";
  out << '\n';
  auto opt = [](const std::optional<double>& v, int prec) {
    if (!v) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << *v;
    return s.str();
  };
  for (const auto& r : report.rows) {
    out << std::left << std::setw(8) << to_string(r.algorithm) << std::setw(6) << to_string(r.mode)
        << std::right << std::setw(5) << r.id << std::setw(6) << r.cost << std::setw(14)
        << r.nodes_expanded << std::setw(6) << r.iterations << std::setw(11) << r.repetitions
        << std::setw(9) << opt(r.load_balance, 2) << std::setw(8) << opt(r.sm_efficiency, 3)
        << std::setw(7) << opt(r.ipc_proxy, 3) << std::setw(12) << r.simulated_steps;
    if (options.wall_time) out << std::setw(10) << opt(r.wall_seconds, 3);
    out << '\n';
  }
  for (Algorithm a : report.algorithms()) {
    out << "\n" << to_string(a) << " summary (mean / min / max / stddev)\n";
    for (const auto& s : report.summarize(a, options.wall_time)) {
      if (s.count == 0) continue;
      out << "  " << std::left << std::setw(16) << s.metric << std::right << std::fixed
          << std::setprecision(4) << std::setw(16) << s.mean << std::setw(16) << s.min
          << std::setw(16) << s.max << std::setw(16) << s.stddev << '\n';
      out.unsetf(std::ios::fixed);
    }
  }
}

bool VerifyReport::all_pass() const {
  return std::all_of(cells.begin(), cells.end(), [](const VerifyCell& c) { return c.pass(); });
}

void VerifyReport::write_matrix(std::ostream& out) const {
  out << "oracle check over " << instance_count << " instances\n";
  for (const auto& c : cells) {
    out << "  " << std::left << std::setw(8) << to_string(c.algorithm) << std::right
        << (c.pass() ? "PASS" : "FAIL") << "  " << (c.checked - c.failed) << "/" << c.checked;
    if (!c.pass()) out << "  first failure: " << c.first_failure;
    out << '\n';
  }
}

void VerifyReport::require_pass() const {
  for (const auto& c : cells) {
    if (c.pass()) continue;
    throw OracleMismatch(std::string(to_string(c.algorithm)) + ": " + c.first_failure,
                         c.counterexample ? format_instance(*c.counterexample) : std::string{});
  }
}

namespace {

/// Empty string when `result` agrees with the oracle.
std::string check_first(const Instance& inst, const RunResult& r, const BfsOracle::Entry& truth) {
  std::ostringstream why;
  if (!r.outcome.found || r.outcome.solutions.empty()) return "no solution found";
  if (r.outcome.cost != truth.distance) {
    why << "cost " << r.outcome.cost << " != optimal " << truth.distance;
    return why.str();
  }
  const Path& p = r.outcome.solutions.front();
  const auto end = replay(inst.start, p);
  if (!end || !(*end == inst.goal) || static_cast<int>(p.size()) != truth.distance) {
    return "returned path does not reach the goal at the optimal cost";
  }
  if (r.final_limit() != truth.distance) {
    why << "final f-limit " << r.final_limit() << " != optimal cost " << truth.distance;
    return why.str();
  }
  return {};
}

std::string check_all(const Instance& inst, const RunResult& r, const BfsOracle::Entry& truth,
                      std::uint64_t reference_nodes) {
  std::ostringstream why;
  if (!r.outcome.found) return "no solution found (all mode)";
  if (r.outcome.cost != truth.distance) {
    why << "all-mode cost " << r.outcome.cost << " != optimal " << truth.distance;
    return why.str();
  }
  if (r.outcome.solutions.size() != truth.optimal_paths) {
    why << "found " << r.outcome.solutions.size() << " optimal paths, oracle counts "
        << truth.optimal_paths;
    return why.str();
  }
  std::set<std::string> distinct;
  for (const Path& p : r.outcome.solutions) {
    const auto end = replay(inst.start, p);
    if (!end || !(*end == inst.goal) || static_cast<int>(p.size()) != truth.distance) {
      return "an all-mode path is invalid";
    }
    distinct.insert(to_string(p));
  }
  if (distinct.size() != r.outcome.solutions.size()) return "duplicate optimal paths";
  if (r.outcome.nodes_expanded != reference_nodes) {
    why << "expanded " << r.outcome.nodes_expanded << " nodes, sequential expands "
        << reference_nodes;
    return why.str();
  }
  if (r.final_limit() != truth.distance) {
    why << "final f-limit " << r.final_limit() << " != optimal cost " << truth.distance;
    return why.str();
  }
  return {};
}

}  // namespace

VerifyReport verify_against_oracle(const RunSpec& base, const std::vector<Algorithm>& algorithms,
                                   const std::vector<Instance>& instances,
                                   const BfsOracle& oracle) {
  VerifyReport report;
  report.instance_count = instances.size();
  // Reference node totals come from an unmodified sequential run.
  std::vector<std::uint64_t> reference(instances.size());
  RunSpec ref_spec = base;
  ref_spec.algorithm = Algorithm::kSeq;
  ref_spec.mode = SearchMode::kAllSolutions;
  ref_spec.heuristic_bias = 0;
  ref_spec.trace = nullptr;
  for_each_index(base.jobs, instances.size(), [&](std::size_t i) {
    reference[i] = run_algorithm(ref_spec, instances[i]).outcome.nodes_expanded;
  });

  for (Algorithm a : algorithms) {
    VerifyCell cell;
    cell.algorithm = a;
    std::vector<std::string> failures(instances.size());
    for_each_index(base.jobs, instances.size(), [&](std::size_t i) {
      const Instance& inst = instances[i];
      const auto truth = oracle.lookup(inst.start);
      if (!truth) {
        failures[i] = "instance not covered by the oracle";
        return;
      }
      RunSpec spec = base;
      spec.algorithm = a;
      spec.trace = nullptr;
      spec.mode = SearchMode::kFirstSolution;
      std::string why = check_first(inst, run_algorithm(spec, inst), *truth);
      if (why.empty()) {
        spec.mode = SearchMode::kAllSolutions;
        why = check_all(inst, run_algorithm(spec, inst), *truth, reference[i]);
      }
      failures[i] = std::move(why);
    });
    for (std::size_t i = 0; i < instances.size(); ++i) {
      ++cell.checked;
      if (failures[i].empty()) continue;
      if (cell.failed++ == 0) {
        cell.first_failure = "instance " + std::to_string(instances[i].id) + ": " + failures[i];
        cell.counterexample = instances[i];
      }
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string spec_fingerprint(const RunSpec& spec) {
  std::ostringstream s;
  const auto& m = spec.machine;
  s << "bpida-1;warp=" << m.warp_size << ";lanes=" << m.lanes_per_block << ";sm=" << m.sm_count
    << ";slots=" << m.warp_slots_per_sm << ";issue=" << m.issue_width << ";blocks=" << m.blocks
    << ";dfs=" << spec.dfs_stack_capacity << ";shared=" << spec.block_stack_capacity
    << ";dedup=" << spec.roots.closed_dedup << ";bias=" << spec.heuristic_bias;
  return s.str();
}

void write_verify_stamp(const std::string& path, const std::string& fingerprint) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write verify stamp " + path);
  out << "verify pass\n" << fingerprint << '\n';
}

bool has_verify_stamp(const std::string& path, const std::string& fingerprint) {
  std::ifstream in(path);
  std::string status;
  std::string stamped;
  if (!std::getline(in, status) || !std::getline(in, stamped)) return false;
  return status == "verify pass" && stamped == fingerprint;
}

std::string data_dir() {
  if (const char* env = std::getenv("BPIDA_DATA_DIR"); env && *env) return env;
  return BPIDA_DEFAULT_DATA_DIR;
}

std::string korf_path() { return data_dir() + "/korf100.txt"; }

}  // namespace bpida
