#pragma once

#include <vector>

#include "erec/junior_senior.hpp"

namespace erec::purification {

/**
 * Family of i.i.d. per-action payoff shocks. Each period a player privately
 * observes one draw per action; the shock enters the current flow payoff as
 * epsilon * z(action) and never the continuation.
 */
enum class ShockFamily {
  /// z(action) uniform on [-1, 1]; z(C) - z(D) is triangular on [-2, 2].
  UniformSymmetric,
};

/**
 * CDF of z(C) - z(D) for UniformSymmetric shocks: the symmetric triangular
 * distribution on [-2, 2], F(w) = (w+2)^2/8 for w in [-2, 0] and
 * 1 - (2-w)^2/8 for w in [0, 2].
 */
double shock_difference_cdf(double w);

struct PerturbOptions {
  /// Sup-norm tolerance on the choice-probability update.
  double tol = 1e-10;
  int max_iter = 20000;
  /// Initial relaxation factor; halved whenever the residual stops falling.
  double damping = 0.5;
  double damping_floor = 1e-4;
};

/**
 * A fixed point of the shock-perturbed best-reply map on the two-state
 * automaton: choice_prob[own][opp] is the probability of playing C given the
 * pair of records, mu the induced steady state, value the shock-free
 * continuation values.
 */
struct PerturbedEquilibrium {
  double epsilon = 0.0;
  double start_q = 0.0;
  std::vector<std::vector<double>> choice_prob;
  std::vector<std::vector<double>> erase_prob;
  std::vector<double> mu;
  std::vector<double> value;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/**
 * Damped fixed-point iteration for the perturbed dilemma. Each pass rebuilds
 * the steady state and values under the current choice probabilities, derives
 * the erasure rule (erase exactly when the stepped record is worth strictly
 * less), and maps one-shot value gaps through the shock CDF. Damping halves
 * adaptively because the response slope scales like 1/epsilon.
 */
PerturbedEquilibrium perturbed_fixed_point(double g, double l, double hat_delta, double bar_delta,
                                           double epsilon, double start_q,
                                           ShockFamily family = ShockFamily::UniformSymmetric,
                                           const PerturbOptions& options = {});

/** All fixed-point runs at one shock scale, plus the closest-run distance. */
struct EpsilonLevel {
  double epsilon = 0.0;
  std::vector<PerturbedEquilibrium> runs;
  /// Index into runs of the converged run closest to the unperturbed point.
  int best_run = -1;
  /// max-cell |choice_prob - sigma| + sup-norm mu deviation, over the best run.
  double distance = 0.0;
};

struct PurificationReport {
  std::vector<EpsilonLevel> levels;
  std::vector<double> starts;
  /// Least-squares slope of log d against log epsilon (undefined for 1 level).
  double decay_slope = 0.0;
  bool slope_defined = false;
  bool decreasing = false;
  bool pass = false;
};

/**
 * Purification evidence for a solved equilibrium: for each shock scale in the
 * decreasing list, fixed points from every start, the distance of the closest
 * one, and the PASS verdict (distances decreasing and the final distance at
 * most ten times the final epsilon). Throws NonConvergence if no start
 * converges at some level.
 */
PurificationReport purification_check(const junior_senior::Equilibrium& eq,
                                      const std::vector<double>& epsilons,
                                      const std::vector<double>& starts = {0.1, 0.5, 0.9},
                                      const PerturbOptions& options = {});

/** Decay path of one start: junior-vs-junior C-probability per shock scale. */
struct CollapseTrack {
  double start_q = 0.0;
  std::vector<double> junior_junior;
  bool decaying = false;
};

/**
 * Desk-scale collapse evidence for weakly supermodular payoffs (g <= l).
 */
struct CollapseCertificate {
  /// max over the (q, bar_delta) grid of the candidate margin q mu1 (g - l).
  double max_margin = 0.0;
  bool margin_nonpositive = false;
  std::vector<CollapseTrack> tracks;
  /// Largest junior-vs-junior C-probability at the smallest shock scale.
  double final_cooperation = 0.0;
  bool collapsed = false;
  bool certified = false;
};

/**
 * Two-part certificate that the cooperative construction fails when g <= l:
 * the always-defect-and-erase margin q mu1 (g - l) is non-positive on a
 * (q, bar_delta) grid, and perturbed fixed points from each start decay
 * toward zero junior-vs-junior cooperation as the shock scale shrinks,
 * ending at or below the collapse threshold.
 */
CollapseCertificate supermodular_collapse_certificate(
    double g, double l, double hat_delta, double bar_delta, const std::vector<double>& epsilons,
    const std::vector<double>& starts = {0.1, 0.5, 0.9}, double collapse_threshold = 0.02,
    const PerturbOptions& options = {});

/** Scope limitation stamped into every purification artifact. */
inline constexpr const char* kEvidenceCaveat =
    "Desk-scale evidence, not proof: one shock family, one solver path, and "
    "the two-state automaton strategy class; the purifiability definition "
    "quantifies over all shock distributions and all converging equilibrium "
    "sequences.";

}  // namespace erec::purification
