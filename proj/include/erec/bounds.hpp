#pragma once

#include <optional>
#include <string>
#include <vector>

#include "erec/game.hpp"
#include "erec/record.hpp"

namespace erec::bounds {

/**
 * Constants behind the dominant-action impossibility chain for one role:
 * deviation costs, the support margin, the per-signal value-jump bound, the
 * band width, and the record-count bound, all at the given effective
 * discount factor.
 */
struct ChainConstants {
  /// Largest flow cost of not playing the dominant action (as defined).
  double c_star = 0.0;
  /// Smallest such cost; the prose variant. Reported alongside, never merged.
  double c_min = 0.0;
  /// Support margin: every signal reachable with probability > eta under some
  /// own action regardless of the opponents' actions.
  double eta = 0.0;
  double v_max = 0.0;
  double v_min = 0.0;
  /// Value-jump bound (v_max - v_min) / eta; at least c_star.
  double d_big = 0.0;
  /// Effective discount the widths and the record bound are evaluated at.
  double delta = 0.0;
  /// Bound on the number of occupied value bands:
  /// (v_max - v_min)/c_star * 2 delta/(1 - delta) + 1.
  double k_bound = 0.0;
  /// X = 2 d_big / c_star.
  double x_big = 0.0;
  /// Band width (1 - delta) c_star / (2 delta).
  double band_width = 0.0;
  int dominant_action = -1;
};

/**
 * Derives the chain constants. Throws NoDominantAction unless the role has a
 * strictly dominant action, SupportShifts unless monitoring satisfies
 * non-shifting support.
 */
ChainConstants chain_constants(const StageGame& game, const MonitoringStructure& mon, int role,
                               double delta);

/**
 * The 2^floor(k_bound) * x_big * (1 - bar_delta) upper bound on the average
 * probability of playing a non-dominant action, kept in log2 space so large
 * k_bound never overflows. Vacuous (and flagged) whenever it exceeds one.
 */
struct RecordBound {
  double log2_value = 0.0;
  double value = 0.0;
  bool vacuous = false;
};

RecordBound record_bound(const ChainConstants& constants, double bar_delta);

/**
 * Smallest survival probability on the resolution grid at which the record
 * bound first drops to the target, with the constants re-derived at
 * delta = hat_delta * bar_delta per point. Empty when no grid point works.
 */
std::optional<double> bar_delta_for_bound(const StageGame& game, const MonitoringStructure& mon,
                                          int role, double hat_delta, double target,
                                          double resolution = 1e-6);

/**
 * One measured chain inequality (or identity). Required checks are
 * steady-state theorems: a failure indicates a solver bug, never a property
 * of the parameters. Non-required checks report the two deviation-cost
 * variants, which can genuinely fail as written.
 */
struct InequalityCheck {
  std::string name;
  /// Band the check concerns, or -1 for aggregates.
  int band = -1;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  /// False when the conditioning event carries no mass.
  bool applicable = true;
  bool required = false;
};

struct BandStats {
  int index = 0;
  double mass = 0.0;
  /// Probability the next record stays in this band.
  double stay = 0.0;
  /// Probability of playing a non-dominant action from this band.
  double nondominant = 0.0;
  /// Stay probability conditional on playing a non-dominant action.
  double deviant_stay = 0.0;
  /// Mean keep-or-erase-optimal value gain conditional on that event.
  double deviant_gain = 0.0;
};

struct BandReport {
  double width = 0.0;
  /// Value at the automaton's initial state; bands are anchored here.
  double anchor = 0.0;
  /// Band index per automaton state; -1 marks (near) zero-mass states.
  std::vector<int> band_of_state;
  /// Occupied bands in ascending index order.
  std::vector<BandStats> bands;
  /// flow[j][k]: next-band distribution between occupied bands.
  std::vector<std::vector<double>> flow;
  int max_band_index = 0;
  /// Total steady-state mass moving to a strictly lower band (should be ~0).
  double downward_flow = 0.0;
  /// Population probability of a non-dominant action, measured from mu.
  double average_nondominant = 0.0;
  RecordBound bound;
  std::vector<InequalityCheck> checks;
  /// True iff every applicable required check holds.
  bool required_hold = false;
};

/**
 * Assigns positive-mass states to half-open value bands of the constants'
 * width anchored at the initial state's value, measures per-band stay/flow
 * probabilities and deviation rates from the one-period transition law, and
 * evaluates the full inequality chain. The profile must pass the one-shot
 * deviation audit at certification_tol first; otherwise NotCertified.
 */
BandReport band_decomposition(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                              const StateDistribution& own_mu, const StateDistribution& opp_mu,
                              const std::vector<double>& value, const MonitoringStructure& mon,
                              const StageGame& game, const ChainConstants& constants,
                              double bar_delta, double certification_tol = 1e-8);

struct RoleCertificate {
  double average_payoff = 0.0;
  /// Payoff from always playing the dominant action and erasing everything.
  double secure_payoff = 0.0;
  /// Population probability of a non-dominant action (C in the dilemma).
  double average_nondominant = 0.0;
  bool rational = false;
};

/**
 * Secure-payoff rationality certificate: every role's average payoff must
 * cover its always-dominant-action-and-erase deviation payoff. A profile
 * failing this cannot be an equilibrium.
 */
struct RationalityCertificate {
  std::vector<RoleCertificate> roles;
  double min_role_nondominant = 0.0;
  bool rational = false;
};

RationalityCertificate rationality_certificate(const RecordAutomaton& aut,
                                               const StrategyProfile& profile,
                                               const MonitoringStructure& mon,
                                               const StageGame& game,
                                               const std::vector<StateDistribution>& mu,
                                               double tol = 1e-9);

}  // namespace erec::bounds
