#ifndef BPIDA_HARNESS_HPP
#define BPIDA_HARNESS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bpida/executor.hpp"
#include "bpida/oracle.hpp"
#include "bpida/parallel.hpp"
#include "bpida/rootset.hpp"
#include "bpida/simt.hpp"

namespace bpida {

enum class Algorithm { kSeq, kG1, kPSimple, kPStatic, kPFull, kBpida };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms{
    Algorithm::kSeq,     Algorithm::kG1,   Algorithm::kPSimple,
    Algorithm::kPStatic, Algorithm::kPFull, Algorithm::kBpida};

std::string_view to_string(Algorithm a);
/// Throws ConfigError on an unknown name.
Algorithm parse_algorithm(std::string_view name);
/// Comma-separated list; "all" expands to every algorithm.
std::vector<Algorithm> parse_algorithms(std::string_view list);

std::string_view to_string(SearchMode m);
SearchMode parse_mode(std::string_view name);

struct RunSpec {
  Algorithm algorithm = Algorithm::kSeq;
  SearchMode mode = SearchMode::kFirstSolution;
  simt::MachineConfig machine;
  /// Per-lane DFS stack (seq, g1, thread variants).
  std::size_t dfs_stack_capacity = 128;
  /// Per-block shared stack (BPIDA*).
  std::size_t block_stack_capacity = 4096;
  RootSetOptions roots;
  /// Run on host threads instead of the simulated machine.
  bool real_parallel = false;
  ExecutorOptions executor;
  /// Independent instances solved concurrently.
  int jobs = 1;
  /// Reserved; every default path is deterministic.
  std::uint64_t seed = 0;
  /// Test hook forwarded to Domain::heuristic_bias.
  int heuristic_bias = 0;
  simt::TraceSink* trace = nullptr;
};

/// Everything one algorithm run on one instance produces.
struct RunResult {
  SearchOutcome outcome;
  /// Per-limit reports; empty for seq.
  std::vector<IterationReport> iterations;
  simt::StepCounters totals;
  simt::Metrics metrics;
  bool machine_metrics = false;
  bool has_load_balance = false;
  std::uint64_t repetitions = 0;
  /// Machine ticks, or expansions for seq.
  std::uint64_t simulated_steps = 0;
  double wall_seconds = 0.0;

  /// Limit of the last iteration run.
  int final_limit() const;
};

RunResult run_algorithm(const RunSpec& spec, const Instance& instance);

struct InstanceRow {
  Algorithm algorithm = Algorithm::kSeq;
  SearchMode mode = SearchMode::kFirstSolution;
  int id = 0;
  int cost = -1;
  std::uint64_t nodes_expanded = 0;
  int iterations = 0;
  std::uint64_t repetitions = 0;
  std::optional<double> load_balance;
  std::optional<double> sm_efficiency;
  std::optional<double> ipc_proxy;
  std::uint64_t simulated_steps = 0;
  std::size_t solutions = 0;
  double wall_seconds = 0.0;
};

InstanceRow make_row(const RunSpec& spec, const Instance& instance, const RunResult& result);

struct MetricSummary {
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;
  double total = 0.0;
};

struct Report {
  std::vector<InstanceRow> rows;

  /// Summaries for cost, nodes_expanded, iterations, repetitions,
  /// load_balance, sm_efficiency, ipc_proxy, simulated_steps (and
  /// wall_seconds when requested), over the rows of `algorithm`.
  std::vector<MetricSummary> summarize(Algorithm algorithm, bool wall_time = false) const;
  std::vector<Algorithm> algorithms() const;
};

/// Runs `spec` on every instance, `spec.jobs` at a time; rows keep input order.
Report run_suite(const RunSpec& spec, const std::vector<Instance>& instances);

struct OutputOptions {
  bool wall_time = false;
};

/// Stable columns: algorithm,mode,id,cost,nodes_expanded,iterations,
/// repetitions,load_balance,sm_efficiency,ipc_proxy,simulated_steps,
/// solutions[,wall_seconds]. Aggregate rows follow, with id set to
/// mean/min/max/stddev/total. Empty fields mean "not applicable".
void write_csv(const Report& report, std::ostream& out, const OutputOptions& options = {});
void write_json(const Report& report, std::ostream& out, const OutputOptions& options = {});
void write_table(const Report& report, std::ostream& out, const OutputOptions& options = {});

/// Per-algorithm result of checking against the BFS oracle.
struct VerifyCell {
  Algorithm algorithm = Algorithm::kSeq;
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::string first_failure;
  std::optional<Instance> counterexample;
  bool pass() const { return failed == 0; }
};

struct VerifyReport {
  std::vector<VerifyCell> cells;
  std::size_t instance_count = 0;

  bool all_pass() const;
  void write_matrix(std::ostream& out) const;
  /// Throws OracleMismatch carrying the first counterexample.
  void require_pass() const;
};

/// For each algorithm and instance: FirstSolution cost, path validity and
/// final limit against the oracle; AllSolutions path count against the
/// oracle and node total against an unmodified sequential run.
VerifyReport verify_against_oracle(const RunSpec& base, const std::vector<Algorithm>& algorithms,
                                   const std::vector<Instance>& instances,
                                   const BfsOracle& oracle);

/// Identity of the configuration a verify stamp vouches for.
std::string spec_fingerprint(const RunSpec& spec);
void write_verify_stamp(const std::string& path, const std::string& fingerprint);
/// True iff `path` holds a passing stamp for `fingerprint`.
bool has_verify_stamp(const std::string& path, const std::string& fingerprint);

/// $BPIDA_DATA_DIR when set, else the directory configured at build time.
std::string data_dir();
/// The bundled Korf instances, easiest first.
std::string korf_path();

}  // namespace bpida

#endif  // BPIDA_HARNESS_HPP
