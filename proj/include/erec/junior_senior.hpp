#pragma once

#include <optional>

#include "erec/record.hpp"

namespace erec::junior_senior {

/**
 * Closed-form cooperative equilibrium of the strictly submodular dilemma on
 * the two-state junior/senior automaton. Juniors mix on cooperation with
 * probability q against juniors, cooperate against seniors, and seniors
 * always defect; nobody erases. All quantities are analytic in (g, l,
 * hat_delta, bar_delta, q).
 */
struct Equilibrium {
  double g = 0.0;
  double l = 0.0;
  double hat_delta = 0.0;
  double bar_delta = 0.0;
  double delta = 0.0;

  double q = 0.0;    ///< junior-vs-junior cooperation probability
  double mu0 = 0.0;  ///< steady-state junior share
  double mu1 = 0.0;  ///< steady-state senior share
  double v0 = 0.0;   ///< junior continuation value
  double v1 = 0.0;   ///< senior continuation value

  /// Signed residual of the junior's cooperate/defect indifference.
  double margin_indifference = 0.0;
  /// Strict gain from cooperating against a senior: (1-delta) q (g-l).
  double margin_junior_vs_senior = 0.0;
  /// Senior's strict gain from defecting against a cooperator: (1-delta) g.
  double margin_senior_vs_c = 0.0;
  /// Senior's strict gain from defecting against a defector: (1-delta) l.
  double margin_senior_vs_d = 0.0;
  /// Gain over the always-defect-and-erase deviation: q mu1 (g-l).
  double margin_always_defect = 0.0;

  /// q = 0 boundary solution: existence holds with equality, no cooperation.
  bool degenerate = false;
};

/**
 * Junior share solving mu0 = (1-bar_delta) + bar_delta * mu0^2 (1-q):
 * the smaller root, exactly 1-bar_delta at q = 1. Evaluated in the
 * subtraction-free form 2(1-bar_delta) / (1 + sqrt(1 - 4 bar_delta
 * (1-q)(1-bar_delta))), which is stable across the whole parameter box.
 */
double mu0_of_q(double q, double bar_delta);

/** Existence condition data for the cooperative construction. */
struct ExistenceCondition {
  /// (1-bar_delta)/bar_delta, the written threshold form.
  double lhs_written = 0.0;
  /// mu0_of_q(0, bar_delta), the binding form (they agree for bar_delta >= 1/2).
  double lhs_binding = 0.0;
  /// (1-delta)/delta * l/(1+g).
  double rhs = 0.0;
  bool holds_written = false;
  bool holds_binding = false;
};

ExistenceCondition existence_condition(double g, double l, double hat_delta, double bar_delta);

/**
 * Solves the equilibrium by bisection on q (the mixing equation's LHS is
 * strictly decreasing and its RHS strictly increasing in q). Returns none
 * when no root exists, which is exactly a strict failure of the existence
 * inequality; equality lands on the degenerate q = 0 solution.
 */
std::optional<Equilibrium> solve(double g, double l, double hat_delta, double bar_delta);

/** Re-derives every residual and margin; throws VerificationFailure on breach. */
void verify(const Equilibrium& eq, double tol = 1e-9);

struct FeasibilityInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/**
 * Maximal contiguous survival-probability range (grid-scanned at the given
 * resolution) where solve succeeds with q > 0 and strict margins positive.
 */
std::optional<FeasibilityInterval> feasibility_interval(double g, double l, double hat_delta,
                                                        double resolution = 1e-4);

/** Closed-form endpoints of the feasible survival range (none when empty). */
std::optional<FeasibilityInterval> feasibility_interval_closed_form(double g, double l,
                                                                    double hat_delta);

/** Population share playing C in a period: mu0 (mu0 q + mu1). */
double average_cooperation(const Equilibrium& eq);

/** Population-average per-period payoff, identical across the two roles. */
double average_payoff_analytic(const Equilibrium& eq);

/** The equilibrium behavior rule for one role (never erases). */
RoleStrategy strategy(double q);

/** Both roles playing the junior/senior rule with the same q. */
StrategyProfile profile(double q);

}  // namespace erec::junior_senior
