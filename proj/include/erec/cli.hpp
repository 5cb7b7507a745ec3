#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erec/game.hpp"
#include "erec/record.hpp"

namespace erec::cli {

enum class Command { Solve, Scan, Verify, Bounds, Purify, Simulate, Sweep };

/** How the per-role strategy is obtained at run time. */
enum class StrategySource {
  Solved,        ///< solve the two-state mixing equilibrium from the game
  JuniorSenior,  ///< two-state strategy with an explicit junior mixing weight
  Explicit,      ///< full action/erasure tables from the config
};

/** Fully validated run description assembled from a JSON config plus flags. */
struct RunConfig {
  Command command = Command::Solve;
  std::string out_dir = "out";
  double tol = 1e-9;
  std::uint64_t seed = 1;

  StageGame game;
  std::optional<PrisonersDilemmaParams> pd;  ///< set when the game came in pd form
  MonitoringStructure monitoring;
  RecordAutomaton automaton;
  std::vector<PopulationParams> populations;  ///< size 2

  StrategySource strategy_source = StrategySource::Solved;
  double strategy_q = 0.0;            ///< JuniorSenior source
  StrategyProfile explicit_strategy;  ///< Explicit source

  // scan
  std::vector<double> scan_hat_deltas;
  double scan_resolution = 1e-4;

  // bounds
  int bounds_role = 0;
  double bound_target = 1e-2;

  // purify
  std::vector<double> purify_epsilons;
  std::vector<double> purify_starts = {0.1, 0.5, 0.9};
  double collapse_threshold = 0.02;

  // simulate
  std::int64_t sim_agents = 1000;
  std::int64_t sim_periods = 1000;
  std::int64_t sim_burn_in = 100;
  bool sim_record_trace = true;
  double sim_compare_tolerance = 0.01;

  // sweep
  std::vector<double> sweep_g;
  std::vector<double> sweep_l;
  std::vector<double> sweep_hat_delta;
  std::vector<double> sweep_bar_delta;
};

/** Command-line overrides that take precedence over config file entries. */
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

/**
 * Parses and validates a JSON config for the given command. Unknown keys are
 * rejected with the offending path in the message. Output directory
 * precedence: override flag, then ERASABLE_RECORDS_OUT, then the config
 * entry, then "out".
 */
RunConfig load_config(Command command, const std::string& path, const Overrides& overrides);

Command parse_command(const std::string& name);

/** Runs one fully validated command; returns the process exit code. */
int dispatch(const RunConfig& config);

/**
 * Full entry point: argv parsing, config load, dispatch. Returns 0 on
 * success, 2 when the requested object provably does not exist (the artifact
 * records the violated inequality), 1 on any error.
 */
int run(int argc, const char* const* argv);

/** Worker count for sweep evaluation (ERASABLE_RECORDS_THREADS, else cores). */
unsigned worker_threads();

}  // namespace erec::cli
