#pragma once

#include <cstdint>
#include <vector>

#include "erec/game.hpp"
#include "erec/record.hpp"

namespace erec::sim {

/**
 * Finite-agent Monte Carlo settings. Two populations of `agents` players
 * each are matched one-to-one every period; the seed drives a counter-based
 * generator, so identical configs reproduce bit-identical results.
 */
struct SimConfig {
  int agents = 1000;
  int periods = 1000;
  int burn_in = 100;
  std::uint64_t seed = 1;
  /// Keep the per-period trace (state counts and cooperation frequencies).
  bool record_trace = true;
};

/** State counts and first-action frequencies of one period, per role. */
struct PeriodStats {
  int period = 0;
  /// counts[role][state], measured at the period start before matching.
  std::vector<std::vector<int>> counts;
  /// Share of the role playing its first action (C in the dilemma).
  std::vector<double> coop_freq;
};

struct SimResult {
  int agents = 0;
  int measured_periods = 0;
  /// Time-averaged record distribution per role, after burn-in.
  std::vector<StateDistribution> mu;
  /// Time-averaged own-action frequencies per role, after burn-in.
  std::vector<std::vector<double>> action_freq;
  /// Time-averaged per-agent flow payoff per role, after burn-in.
  std::vector<double> mean_payoff;
  long long births = 0;
  long long deaths = 0;
  std::vector<PeriodStats> trace;
};

/**
 * Simulates the population process: uniform random matching across the two
 * populations, actions from the profile given both records, signals from the
 * monitoring structure, the erasure decision, and independent per-agent
 * deaths (probability 1 - bar_delta, replacement by a newborn at the initial
 * state) resolved after play. All randomness is keyed by
 * (seed, period, agent, purpose); deterministic draws skip the generator
 * without affecting any other draw.
 */
SimResult run(const RecordAutomaton& aut, const StrategyProfile& profile,
              const MonitoringStructure& mon, const StageGame& game,
              const std::vector<PopulationParams>& populations, const SimConfig& config);

struct StateComparison {
  double empirical = 0.0;
  double analytic = 0.0;
  double deviation = 0.0;
  /// Deviation over the single-period binomial standard error.
  double z = 0.0;
};

struct Comparison {
  std::vector<std::vector<StateComparison>> states;
  double max_deviation = 0.0;
  bool pass = false;
};

/** Per-state deviation report of empirical vs analytic distributions. */
Comparison compare(const SimResult& result, const std::vector<StateDistribution>& analytic,
                   double tolerance);

}  // namespace erec::sim
