#pragma once

#include <string>
#include <vector>

#include "erec/game.hpp"

namespace erec {

/**
 * Finite automaton over a role's own signals. A record state summarizes the
 * signals the player has chosen to keep; erasing a signal leaves the state
 * unchanged, keeping it moves the state along step[state][signal].
 */
struct RecordAutomaton {
  std::vector<std::string> states;
  int initial = 0;
  std::vector<std::vector<int>> step;

  int state_count() const { return static_cast<int>(states.size()); }
  int signal_count() const { return step.empty() ? 0 : static_cast<int>(step[0].size()); }
};

/** Throws unless the step table is rectangular with valid state targets. */
void validate_automaton(const RecordAutomaton& aut);

/**
 * Two-state convention for the dilemma: everyone starts Junior and becomes
 * Senior by keeping a cooperation signal; Senior is absorbing and defection
 * signals never move the state.
 */
RecordAutomaton junior_senior_automaton();

/**
 * States count the number of kept signals, capped at an absorbing tail.
 * Useful as a neutral test automaton: every kept signal increments the state.
 */
RecordAutomaton length_counting_automaton(int cap, int signal_count);

/// JSON serialization round trip for automata (states, initial, step).
std::string automaton_to_json(const RecordAutomaton& aut);
RecordAutomaton automaton_from_json(const std::string& text);

/**
 * One role's behavior rule. Actions condition on the pair of records visible
 * in a match; erasure conditions on the own record and the realized signal.
 */
struct RoleStrategy {
  /// action_rule[own_state][opp_state] is a distribution over own actions.
  std::vector<std::vector<std::vector<double>>> action_rule;
  /// erasure_rule[own_state][signal] is the probability of erasing the signal.
  std::vector<std::vector<double>> erasure_rule;
};

/** Per-role strategies; index 0 and 1 are the two matched populations. */
struct StrategyProfile {
  std::vector<RoleStrategy> roles;
};

void validate_strategy(const RoleStrategy& strategy, const RecordAutomaton& aut,
                       int own_actions, int opp_states);

using StateDistribution = std::vector<double>;

/**
 * Row-stochastic one-period transition kernel over own record states,
 * averaging over the opponent distribution, both mixed actions, signals, and
 * the erasure decision. Carries the newborn state for steady-state solves.
 */
struct TransitionKernel {
  std::vector<std::vector<double>> rows;
  int initial = 0;

  int state_count() const { return static_cast<int>(rows.size()); }
};

TransitionKernel build_kernel(const RecordAutomaton& aut, const RoleStrategy& own,
                              const StateDistribution& opponent_distribution,
                              const RoleStrategy& opponent, const MonitoringStructure& mon,
                              const StageGame& game, int role);

/**
 * Survival-weighted steady state: the unique solution of
 * mu = (1 - bar_delta) e_initial + bar_delta * mu K.
 * Direct linear solve; see stationary_distribution_iterative for the
 * cross-check route.
 */
StateDistribution stationary_distribution(const TransitionKernel& kernel, double bar_delta);

/** Damped-free affine power iteration; throws NonConvergence past max_iter. */
StateDistribution stationary_distribution_iterative(const TransitionKernel& kernel,
                                                    double bar_delta, double tol = 1e-12,
                                                    int max_iter = 1000000);

struct FixedPointOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  double damping = 0.5;
};

struct SelfConsistentResult {
  /// Per-role record distributions (equal in symmetric setups).
  std::vector<StateDistribution> mu;
  int iterations = 0;
  double residual = 0.0;
};

/**
 * Joint fixed point of the two populations' steady states: each role's
 * distribution is stationary for the kernel induced by the other role's
 * distribution. Damped iteration; both populations share the automaton and
 * the demographics.
 */
SelfConsistentResult self_consistent_distribution(const RecordAutomaton& aut,
                                                  const StrategyProfile& profile,
                                                  const MonitoringStructure& mon,
                                                  const StageGame& game, double bar_delta,
                                                  const FixedPointOptions& options = {},
                                                  const std::vector<StateDistribution>* start = nullptr);

/** Population-average distribution over the role's own actions. */
std::vector<double> average_action_distribution(const StateDistribution& own_mu,
                                                const StateDistribution& opp_mu,
                                                const RoleStrategy& own);

/** Population-average per-period payoff for the role. */
double average_payoff(const StateDistribution& own_mu, const StateDistribution& opp_mu,
                      const StrategyProfile& profile, const StageGame& game, int role);

}  // namespace erec
