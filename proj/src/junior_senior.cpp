#include "erec/junior_senior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "erec/errors.hpp"
#include "erec/game.hpp"

namespace erec::junior_senior {

namespace {

void check_parameters(double g, double l, double hat_delta, double bar_delta) {
  const PrisonersDilemmaParams pd = pd_params(g, l);
  if (pd.modularity != Modularity::Submodular) {
    throw NotSubmodular("junior/senior construction requires g > l");
  }
  PopulationParams pop;
  pop.hat_delta = hat_delta;
  pop.bar_delta = bar_delta;
  validate_population(pop);
}

/**
 * Signed one-shot gain, up to the positive factor (1-delta) delta (1+g) /
 * (1 - delta mu0), from cooperating rather than defecting against a junior
 * when juniors cooperate with probability q. Strictly decreasing in q, so the
 * equilibrium q is its unique root whenever the gain at q = 0 is positive.
 */
double mixing_gain(double q, double g, double l, double delta, double bar_delta) {
  const double mu0 = mu0_of_q(q, bar_delta);
  const double beta = l / (1.0 + g);
  return (1.0 - q) * mu0 - (1.0 - delta) / delta * beta -
         q * (g - l) / (1.0 + g) * (1.0 / delta - mu0);
}

Equilibrium assemble(double g, double l, double hat_delta, double bar_delta, double q,
                     bool degenerate) {
  Equilibrium eq;
  eq.g = g;
  eq.l = l;
  eq.hat_delta = hat_delta;
  eq.bar_delta = bar_delta;
  eq.delta = hat_delta * bar_delta;
  eq.q = q;
  eq.degenerate = degenerate;

  const double delta = eq.delta;
  eq.mu0 = mu0_of_q(q, bar_delta);
  eq.mu1 = 1.0 - eq.mu0;
  eq.v1 = eq.mu0 * (1.0 + g);
  const double switch_cost = q * g + (1.0 - q) * l;
  eq.v0 = eq.v1 - (1.0 - delta) / delta * switch_cost;

  eq.margin_indifference = delta * (eq.v1 - eq.v0) - (1.0 - delta) * switch_cost;
  eq.margin_junior_vs_senior = (1.0 - delta) * q * (g - l);
  eq.margin_senior_vs_c = (1.0 - delta) * g;
  eq.margin_senior_vs_d = (1.0 - delta) * l;
  eq.margin_always_defect = eq.v0 - eq.mu0 * q * (1.0 + g);
  return eq;
}

}  // namespace

double mu0_of_q(double q, double bar_delta) {
  const double discriminant = 1.0 - 4.0 * bar_delta * (1.0 - q) * (1.0 - bar_delta);
  return 2.0 * (1.0 - bar_delta) / (1.0 + std::sqrt(std::max(discriminant, 0.0)));
}

ExistenceCondition existence_condition(double g, double l, double hat_delta, double bar_delta) {
  check_parameters(g, l, hat_delta, bar_delta);
  const double delta = hat_delta * bar_delta;
  ExistenceCondition cond;
  cond.lhs_written = (1.0 - bar_delta) / bar_delta;
  cond.lhs_binding = mu0_of_q(0.0, bar_delta);
  cond.rhs = (1.0 - delta) / delta * l / (1.0 + g);
  cond.holds_written = cond.lhs_written >= cond.rhs;
  cond.holds_binding = cond.lhs_binding >= cond.rhs;
  return cond;
}

std::optional<Equilibrium> solve(double g, double l, double hat_delta, double bar_delta) {
  check_parameters(g, l, hat_delta, bar_delta);
  const double delta = hat_delta * bar_delta;

  const double gain_at_zero = mixing_gain(0.0, g, l, delta, bar_delta);
  if (gain_at_zero < 0.0) {
    return std::nullopt;
  }
  if (gain_at_zero == 0.0) {
    return assemble(g, l, hat_delta, bar_delta, 0.0, /*degenerate=*/true);
  }

  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mixing_gain(mid, g, l, delta, bar_delta) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return assemble(g, l, hat_delta, bar_delta, 0.5 * (lo + hi), /*degenerate=*/false);
}

void verify(const Equilibrium& eq, double tol) {
  const auto fail = [](const std::string& what, double residual) {
    throw VerificationFailure(what + " residual " + std::to_string(residual));
  };
  const double delta = eq.hat_delta * eq.bar_delta;
  if (std::abs(delta - eq.delta) > tol) {
    fail("effective discount factor", std::abs(delta - eq.delta));
  }

  const double quad =
      eq.bar_delta * (1.0 - eq.q) * eq.mu0 * eq.mu0 - eq.mu0 + (1.0 - eq.bar_delta);
  if (std::abs(quad) > tol) fail("steady-state share equation", std::abs(quad));
  if (std::abs(eq.mu0 + eq.mu1 - 1.0) > tol) fail("share normalization", eq.mu0 + eq.mu1 - 1.0);

  const double senior_flow = eq.mu0 * (1.0 + eq.g);
  if (std::abs(eq.v1 - senior_flow) > tol) {
    fail("senior value recursion", std::abs(eq.v1 - senior_flow));
  }

  // Junior value via the cooperate branch (vs a junior the two actions tie).
  const double junior_flow =
      eq.mu0 * (eq.q - (1.0 - eq.q) * eq.l) - eq.mu1 * eq.l;
  const double v0_direct = (1.0 - delta) * junior_flow + delta * eq.v1;
  if (std::abs(eq.v0 - v0_direct) > tol) fail("junior value recursion", std::abs(eq.v0 - v0_direct));

  const double switch_cost = eq.q * eq.g + (1.0 - eq.q) * eq.l;
  const double indifference = delta * (eq.v1 - eq.v0) - (1.0 - delta) * switch_cost;
  if (std::abs(indifference) > tol) fail("junior cooperation indifference", std::abs(indifference));
  if (std::abs(eq.margin_indifference - indifference) > tol) {
    fail("stored indifference margin", std::abs(eq.margin_indifference - indifference));
  }

  const double vs_senior = delta * (eq.v1 - eq.v0) - (1.0 - delta) * eq.l;
  if (std::abs(eq.margin_junior_vs_senior - vs_senior) > tol) {
    fail("junior-vs-senior margin", std::abs(eq.margin_junior_vs_senior - vs_senior));
  }
  if (eq.margin_junior_vs_senior < -tol) fail("junior-vs-senior incentive", eq.margin_junior_vs_senior);

  if (std::abs(eq.margin_senior_vs_c - (1.0 - delta) * eq.g) > tol) {
    fail("senior-vs-cooperator margin", eq.margin_senior_vs_c);
  }
  if (std::abs(eq.margin_senior_vs_d - (1.0 - delta) * eq.l) > tol) {
    fail("senior-vs-defector margin", eq.margin_senior_vs_d);
  }

  const double secure = eq.mu0 * eq.q * (1.0 + eq.g);
  if (std::abs(eq.margin_always_defect - (eq.v0 - secure)) > tol) {
    fail("always-defect margin", std::abs(eq.margin_always_defect - (eq.v0 - secure)));
  }
  if (eq.margin_always_defect < -tol) fail("always-defect incentive", eq.margin_always_defect);

  if (eq.q < 0.0 || eq.q > 1.0) fail("mixing probability range", eq.q);
  if (eq.degenerate && eq.q != 0.0) fail("degenerate flag", eq.q);
}

std::optional<FeasibilityInterval> feasibility_interval(double g, double l, double hat_delta,
                                                        double resolution) {
  check_parameters(g, l, hat_delta, 0.5);
  if (resolution <= 0.0 || resolution >= 1.0) {
    throw NonPositiveParameter("feasibility scan resolution must lie in (0, 1)");
  }
  const int steps = static_cast<int>(std::floor(1.0 / resolution));

  std::optional<FeasibilityInterval> best;
  std::optional<double> run_start;
  double previous = 0.0;
  const auto close_run = [&](double run_end) {
    if (!run_start) return;
    if (!best || run_end - *run_start > best->hi - best->lo) {
      best = FeasibilityInterval{*run_start, run_end};
    }
    run_start.reset();
  };

  for (int i = 1; i < steps; ++i) {
    const double bar_delta = i * resolution;
    if (bar_delta >= 1.0) break;
    const auto eq = solve(g, l, hat_delta, bar_delta);
    const bool cooperative = eq.has_value() && !eq->degenerate && eq->q > 0.0;
    if (cooperative && !run_start) {
      run_start = bar_delta;
    } else if (!cooperative) {
      close_run(previous);
    }
    if (cooperative) previous = bar_delta;
  }
  close_run(previous);
  return best;
}

std::optional<FeasibilityInterval> feasibility_interval_closed_form(double g, double l,
                                                                    double hat_delta) {
  check_parameters(g, l, hat_delta, 0.5);
  const double beta = l / (1.0 + g);
  if (hat_delta <= beta) return std::nullopt;
  const double lo = l / ((1.0 + g + l) * hat_delta);
  const double hi = (hat_delta - beta) / (hat_delta * (1.0 - beta));
  if (lo > hi) return std::nullopt;
  return FeasibilityInterval{lo, hi};
}

double average_cooperation(const Equilibrium& eq) {
  return eq.mu0 * (eq.mu0 * eq.q + eq.mu1);
}

double average_payoff_analytic(const Equilibrium& eq) {
  const double spread = 1.0 + eq.g - eq.l;
  const double junior_pair = eq.q * eq.q + eq.q * (1.0 - eq.q) * spread;
  return eq.mu0 * eq.mu0 * junior_pair + eq.mu0 * eq.mu1 * spread;
}

RoleStrategy strategy(double q) {
  if (q < 0.0 || q > 1.0) {
    throw NonPositiveParameter("mixing probability must lie in [0, 1]");
  }
  RoleStrategy s;
  s.action_rule = {{{q, 1.0 - q}, {1.0, 0.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
  s.erasure_rule = {{0.0, 0.0}, {0.0, 0.0}};
  return s;
}

StrategyProfile profile(double q) {
  StrategyProfile p;
  p.roles = {strategy(q), strategy(q)};
  return p;
}

}  // namespace erec::junior_senior
