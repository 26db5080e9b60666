// Command-line front end: solve, verify, compare, bench.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bpida/errors.hpp"
#include "bpida/harness.hpp"
#include "bpida/oracle.hpp"

namespace {

using namespace bpida;

struct Common {
  std::string algo;
  std::string mode = "first";
  std::string instances;
  int easy_n = 0;
  int warp_size = 32;
  int lanes_per_block = 0;
  int blocks = 0;
  int sm_count = 8;
  int warp_slots = 6;
  std::size_t stack_capacity = 0;
  std::string out;
  std::string trace;
  int jobs = 1;
  bool wall_time = false;
  bool real_parallel = false;
  bool closed_dedup = false;
  std::string stamp = "bpida-verify.stamp";
  int heuristic_bias = 0;
};

void add_machine_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--mode", c.mode, "first or all")->check(CLI::IsMember({"first", "all"}));
  cmd->add_option("--instances", c.instances, "instance file (default: bundled Korf set)");
  cmd->add_option("--easy-n", c.easy_n, "use only the first n instances")->check(CLI::NonNegativeNumber);
  cmd->add_option("--warp-size", c.warp_size, "lanes per warp");
  cmd->add_option("--lanes-per-block", c.lanes_per_block, "lanes per block (default: warp size)");
  cmd->add_option("--blocks", c.blocks, "block count (default: resident capacity)");
  cmd->add_option("--sm-count", c.sm_count, "simulated SMs");
  cmd->add_option("--warp-slots", c.warp_slots, "resident warps per SM");
  cmd->add_option("--stack-capacity", c.stack_capacity,
                  "per-lane DFS stack, or per-block shared stack for bpida");
  cmd->add_option("--out", c.out, "write CSV, or JSON when the path ends in .json");
  cmd->add_option("--trace", c.trace, "write a JSON-lines machine trace");
  cmd->add_option("--jobs", c.jobs, "instances solved concurrently")->check(CLI::PositiveNumber);
  cmd->add_flag("--wall-time", c.wall_time, "include wall-clock seconds in the output");
  cmd->add_flag("--real-parallel", c.real_parallel, "run on host threads instead of the machine");
  cmd->add_flag("--closed-dedup", c.closed_dedup, "drop duplicate states while building roots");
}

RunSpec make_spec(const Common& c) {
  RunSpec spec;
  spec.mode = parse_mode(c.mode);
  spec.machine.warp_size = c.warp_size;
  spec.machine.lanes_per_block = c.lanes_per_block > 0 ? c.lanes_per_block : c.warp_size;
  spec.machine.blocks = c.blocks;
  spec.machine.sm_count = c.sm_count;
  spec.machine.warp_slots_per_sm = c.warp_slots;
  spec.machine.validate();
  if (c.stack_capacity > 0) {
    spec.dfs_stack_capacity = c.stack_capacity;
    spec.block_stack_capacity = c.stack_capacity;
  }
  spec.roots.closed_dedup = c.closed_dedup;
  spec.real_parallel = c.real_parallel;
  spec.jobs = c.jobs;
  spec.heuristic_bias = c.heuristic_bias;
  return spec;
}

std::vector<Instance> load_suite(const Common& c, const std::string& fallback) {
  auto all = load_instances(c.instances.empty() ? fallback : c.instances);
  if (c.easy_n > 0 && static_cast<std::size_t>(c.easy_n) < all.size()) {
    all.resize(static_cast<std::size_t>(c.easy_n));
  }
  if (all.empty()) throw MalformedInstance("no instances selected");
  return all;
}

void emit(const Report& report, const Common& c) {
  OutputOptions opts{c.wall_time};
  write_table(report, std::cout, opts);
  if (c.out.empty()) return;
  std::ofstream f(c.out, std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + c.out);
  const bool json = c.out.size() >= 5 && c.out.substr(c.out.size() - 5) == ".json";
  if (json) {
    write_json(report, f, opts);
  } else {
    write_csv(report, f, opts);
  }
}

Report run_many(RunSpec spec, const std::vector<Algorithm>& algos,
                const std::vector<Instance>& instances) {
  Report all;
  for (Algorithm a : algos) {
    spec.algorithm = a;
    Report r = run_suite(spec, instances);
    all.rows.insert(all.rows.end(), r.rows.begin(), r.rows.end());
  }
  return all;
}

struct TraceFile {
  std::ofstream file;
  std::unique_ptr<simt::TraceSink> sink;

  explicit TraceFile(const std::string& path) {
    if (path.empty()) return;
    file.open(path, std::ios::trunc);
    if (!file) throw ConfigError("cannot write trace " + path);
    sink = std::make_unique<simt::TraceSink>(file);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel IDA* laboratory for sliding-tile puzzles"};
  app.require_subcommand(1);

  Common solve_c;
  solve_c.algo = "seq";
  auto* solve = app.add_subcommand("solve", "run one algorithm on an instance file");
  solve->add_option("--algo", solve_c.algo, "seq, g1, psimple, pstatic, pfull or bpida");
  add_machine_flags(solve, solve_c);

  Common verify_c;
  verify_c.algo = "all";
  std::size_t verify_count = 200;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "check algorithms against the 8-puzzle BFS oracle");
  verify->add_option("--algo", verify_c.algo, "comma-separated list, or all");
  add_machine_flags(verify, verify_c);
  verify->add_option("--count", verify_count, "random 8-puzzles when --instances is not given");
  verify->add_option("--seed", verify_seed, "seed for the random 8-puzzles");
  verify->add_option("--stamp", verify_c.stamp, "where to record a passing run");
  verify->add_option("--heuristic-bias", verify_c.heuristic_bias)->group("");

  Common compare_c;
  compare_c.algo = "psimple,pstatic,pfull,bpida";
  compare_c.easy_n = 30;
  auto* compare = app.add_subcommand("compare", "run several algorithms on one suite");
  compare->add_option("--algo", compare_c.algo, "comma-separated list, or all");
  add_machine_flags(compare, compare_c);

  Common bench_c;
  bench_c.algo = "all";
  bool force = false;
  auto* bench = app.add_subcommand("bench", "benchmark run; needs a passing verify stamp");
  bench->add_option("--algo", bench_c.algo, "comma-separated list, or all");
  add_machine_flags(bench, bench_c);
  bench->add_option("--stamp", bench_c.stamp, "verify stamp to check");
  bench->add_flag("--force", force, "run without a passing verify stamp");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      RunSpec spec = make_spec(solve_c);
      spec.algorithm = parse_algorithm(solve_c.algo);
      TraceFile trace(solve_c.trace);
      spec.trace = trace.sink.get();
      emit(run_suite(spec, load_suite(solve_c, korf_path())), solve_c);
      return 0;
    }
    if (verify->parsed()) {
      RunSpec spec = make_spec(verify_c);
      const auto algos = parse_algorithms(verify_c.algo);
      const auto instances = verify_c.instances.empty()
                                 ? random_instances(3, verify_count, verify_seed)
                                 : load_suite(verify_c, verify_c.instances);
      const BfsOracle oracle(PuzzleState::goal(3));
      const VerifyReport report = verify_against_oracle(spec, algos, instances, oracle);
      report.write_matrix(std::cout);
      if (!report.all_pass()) {
        try {
          report.require_pass();
        } catch (const OracleMismatch& e) {
          std::cerr << "OracleMismatch: " << e.what() << "\ncounterexample: "
                    << e.counterexample() << '\n';
        }
        return 1;
      }
      if (algos.size() == kAllAlgorithms.size()) {
        write_verify_stamp(verify_c.stamp, spec_fingerprint(spec));
        std::cout << "stamp written to " << verify_c.stamp << '\n';
      }
      return 0;
    }
    if (compare->parsed()) {
      RunSpec spec = make_spec(compare_c);
      const auto algos = parse_algorithms(compare_c.algo);
      TraceFile trace(compare_c.trace);
      spec.trace = trace.sink.get();
      emit(run_many(spec, algos, load_suite(compare_c, korf_path())), compare_c);
      return 0;
    }
    if (bench->parsed()) {
      RunSpec spec = make_spec(bench_c);
      if (!force && !has_verify_stamp(bench_c.stamp, spec_fingerprint(spec))) {
        std::cerr << "no passing verify stamp for this configuration at " << bench_c.stamp
                  << "; run `verify` first or pass --force\n";
        return 1;
      }
      const auto algos = parse_algorithms(bench_c.algo);
      TraceFile trace(bench_c.trace);
      spec.trace = trace.sink.get();
      emit(run_many(spec, algos, load_suite(bench_c, korf_path())), bench_c);
      return 0;
    }
  } catch (const OracleMismatch& e) {
    std::cerr << "OracleMismatch: " << e.what() << "\ncounterexample: " << e.counterexample()
              << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "ConfigError: " << e.what() << '\n';
    return 2;
  } catch (const MalformedInstance& e) {
    std::cerr << "MalformedInstance: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
