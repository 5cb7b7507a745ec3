#pragma once

#include <vector>

#include "erec/game.hpp"
#include "erec/record.hpp"

namespace erec {

struct SolveOptions {
  double tol = 1e-12;
  long max_iter = 2000000;
};

struct ValueFunction {
  std::vector<double> v;
  int iterations = 0;
  double residual = 0.0;
};

/**
 * Discounted-average value of following the profile from each own record,
 * with opponents drawn fresh from opp_mu every period:
 *   V(r) = sum_{r'} mu(r') [ (1-delta) E u + delta E_s ((1-e) V(step(r,s)) + e V(r)) ].
 * Fixed-point iteration to the given sup-norm residual (delta-contraction).
 */
ValueFunction policy_value(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                           const StateDistribution& opp_mu, const MonitoringStructure& mon,
                           const StageGame& game, double delta, const SolveOptions& options = {});

/**
 * Value of the best reply against the profile, optimizing the action per
 * opponent record and the keep-or-erase decision per signal:
 *   V(r) = sum_{r'} mu(r') max_a E_b [ (1-delta) u + delta E_s max(V(step(r,s)), V(r)) ].
 */
ValueFunction best_response_value(const RecordAutomaton& aut, const StrategyProfile& profile,
                                  int role, const StateDistribution& opp_mu,
                                  const MonitoringStructure& mon, const StageGame& game,
                                  double delta, const SolveOptions& options = {});

/**
 * One-shot action values with erasure-optimal continuations:
 * q[own_state][opp_state][action] is the value of playing the action now and
 * reverting to the profile afterwards, keeping the signal only if it helps.
 * These back the deviation audit; richer multi-period deviations are covered
 * by the one-shot principle because continuations already take the optimal
 * keep-or-erase branch.
 */
std::vector<std::vector<std::vector<double>>> one_shot_values(
    const RecordAutomaton& aut, const StrategyProfile& profile, int role,
    const std::vector<double>& value, const MonitoringStructure& mon, const StageGame& game,
    double delta);

struct IncentiveOptions {
  /// Opponent states with mass at or below this do not enter max_gap.
  double mass_floor = 1e-15;
  /// Value ties within this margin allow either erasure decision.
  double tie_tol = 1e-9;
};

struct IncentiveReport {
  /// action_gap[own][opp] = best one-shot value minus the prescribed value.
  std::vector<std::vector<double>> action_gap;
  /// erasure_consistent[own][signal]: the rule erases exactly when the value
  /// of the stepped record falls below the current one (ties free).
  std::vector<std::vector<bool>> erasure_consistent;
  /// opponent_field[own_state] is the opponent action distribution faced.
  std::vector<std::vector<double>> opponent_field;
  double max_gap = 0.0;
  bool erasure_ok = true;

  bool certified(double tol) const { return erasure_ok && max_gap <= tol; }
};

/**
 * One-shot deviation audit of the profile at the supplied value function
 * (gaps and erasure checks are computed against the same mu and V).
 */
IncentiveReport incentive_gap(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                              const StateDistribution& opp_mu, const std::vector<double>& value,
                              const MonitoringStructure& mon, const StageGame& game, double delta,
                              const IncentiveOptions& options = {});

/**
 * Per-period payoff of always playing the given action and erasing every
 * signal, which pins the record at the automaton's initial state forever.
 * With a constant flow the discounted average equals the flow itself.
 */
double secure_defection_payoff(const RecordAutomaton& aut, const StateDistribution& opp_mu,
                               const RoleStrategy& opponent, const StageGame& game, int role,
                               int action);

/** Same, defaulting to the strictly dominant action (throws NoDominantAction). */
double secure_defection_payoff(const RecordAutomaton& aut, const StateDistribution& opp_mu,
                               const RoleStrategy& opponent, const StageGame& game, int role);

}  // namespace erec
