#include "erec/value.hpp"

#include <algorithm>
#include <cmath>

#include "erec/errors.hpp"

namespace erec {

namespace {

void check_inputs(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                  const StateDistribution& opp_mu, const MonitoringStructure& mon,
                  const StageGame& game, double delta) {
  validate_automaton(aut);
  if (game.role_count() != 2) throw DimensionMismatch("value solves are built for two roles");
  if (role != 0 && role != 1) throw DimensionMismatch("role must be 0 or 1");
  if (profile.roles.size() != 2) throw DimensionMismatch("two role strategies required");
  if (!(delta > 0.0) || !(delta < 1.0)) throw NonPositiveParameter("delta must lie in (0, 1)");
  if (mon.signal_count(role) != aut.signal_count())
    throw StateSpaceMismatch("automaton signals must match the role's monitoring signals");
  validate_strategy(profile.roles[role], aut, game.action_count(role),
                    static_cast<int>(opp_mu.size()));
}

/** Expected flow payoff per own record under the profile. */
std::vector<double> flow_payoff(const RecordAutomaton& aut, const StrategyProfile& profile,
                                int role, const StateDistribution& opp_mu, const StageGame& game) {
  const RoleStrategy& own = profile.roles[role];
  const RoleStrategy& opp = profile.roles[1 - role];
  const int n = aut.state_count();
  std::vector<double> flow(n, 0.0);
  std::vector<int> pr(2, 0);
  for (int r = 0; r < n; ++r) {
    for (std::size_t ro = 0; ro < opp_mu.size(); ++ro) {
      const double w = opp_mu[ro];
      if (w == 0.0) continue;
      const std::vector<double>& own_dist = own.action_rule[r][ro];
      const std::vector<double>& opp_dist = opp.action_rule[ro][r];
      for (std::size_t a = 0; a < own_dist.size(); ++a) {
        if (own_dist[a] == 0.0) continue;
        for (std::size_t b = 0; b < opp_dist.size(); ++b) {
          if (opp_dist[b] == 0.0) continue;
          pr[role] = static_cast<int>(a);
          pr[1 - role] = static_cast<int>(b);
          flow[r] += w * own_dist[a] * opp_dist[b] * game.payoff(role, pr);
        }
      }
    }
  }
  return flow;
}

}  // namespace

ValueFunction policy_value(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                           const StateDistribution& opp_mu, const MonitoringStructure& mon,
                           const StageGame& game, double delta, const SolveOptions& options) {
  check_inputs(aut, profile, role, opp_mu, mon, game, delta);
  const int n = aut.state_count();
  const TransitionKernel kernel =
      build_kernel(aut, profile.roles[role], opp_mu, profile.roles[1 - role], mon, game, role);
  const std::vector<double> flow = flow_payoff(aut, profile, role, opp_mu, game);

  ValueFunction result;
  result.v = flow;
  std::vector<double> next(n, 0.0);
  for (long it = 1; it <= options.max_iter; ++it) {
    for (int r = 0; r < n; ++r) {
      double cont = 0.0;
      for (int c = 0; c < n; ++c) cont += kernel.rows[r][c] * result.v[c];
      next[r] = (1.0 - delta) * flow[r] + delta * cont;
    }
    double residual = 0.0;
    for (int r = 0; r < n; ++r) residual = std::max(residual, std::abs(next[r] - result.v[r]));
    result.v.swap(next);
    result.iterations = static_cast<int>(it);
    result.residual = residual;
    if (residual <= options.tol) return result;
  }
  throw NonConvergence("policy value iteration did not reach tolerance");
}

ValueFunction best_response_value(const RecordAutomaton& aut, const StrategyProfile& profile,
                                  int role, const StateDistribution& opp_mu,
                                  const MonitoringStructure& mon, const StageGame& game,
                                  double delta, const SolveOptions& options) {
  check_inputs(aut, profile, role, opp_mu, mon, game, delta);
  const RoleStrategy& opp = profile.roles[1 - role];
  const int n = aut.state_count();
  const int actions = game.action_count(role);
  const int signals = aut.signal_count();

  ValueFunction result;
  result.v.assign(n, 0.0);
  std::vector<double> next(n, 0.0);
  std::vector<int> pr(2, 0);
  for (long it = 1; it <= options.max_iter; ++it) {
    for (int r = 0; r < n; ++r) {
      double total = 0.0;
      for (std::size_t ro = 0; ro < opp_mu.size(); ++ro) {
        const double w = opp_mu[ro];
        if (w == 0.0) continue;
        const std::vector<double>& opp_dist = opp.action_rule[ro][r];
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < actions; ++a) {
          double q = 0.0;
          for (int b = 0; b < static_cast<int>(opp_dist.size()); ++b) {
            if (opp_dist[b] == 0.0) continue;
            pr[role] = a;
            pr[1 - role] = b;
            double cont = 0.0;
            const std::vector<double>& f = mon.table[role][game.profile_index(pr)];
            for (int s = 0; s < signals; ++s) {
              if (f[s] == 0.0) continue;
              cont += f[s] * std::max(result.v[aut.step[r][s]], result.v[r]);
            }
            q += opp_dist[b] *
                 ((1.0 - delta) * game.payoff(role, pr) + delta * cont);
          }
          best = std::max(best, q);
        }
        total += w * best;
      }
      next[r] = total;
    }
    double residual = 0.0;
    for (int r = 0; r < n; ++r) residual = std::max(residual, std::abs(next[r] - result.v[r]));
    result.v.swap(next);
    result.iterations = static_cast<int>(it);
    result.residual = residual;
    if (residual <= options.tol) return result;
  }
  throw NonConvergence("best response value iteration did not reach tolerance");
}

std::vector<std::vector<std::vector<double>>> one_shot_values(
    const RecordAutomaton& aut, const StrategyProfile& profile, int role,
    const std::vector<double>& value, const MonitoringStructure& mon, const StageGame& game,
    double delta) {
  validate_automaton(aut);
  if (static_cast<int>(value.size()) != aut.state_count())
    throw StateSpaceMismatch("value function must cover the automaton's states");
  const RoleStrategy& opp = profile.roles[1 - role];
  const int n = aut.state_count();
  const int actions = game.action_count(role);
  const int signals = aut.signal_count();
  const int opp_states = static_cast<int>(opp.action_rule.size());

  std::vector<std::vector<std::vector<double>>> q(
      n, std::vector<std::vector<double>>(opp_states, std::vector<double>(actions, 0.0)));
  std::vector<int> pr(2, 0);
  for (int r = 0; r < n; ++r) {
    for (int ro = 0; ro < opp_states; ++ro) {
      const std::vector<double>& opp_dist = opp.action_rule[ro][r];
      for (int a = 0; a < actions; ++a) {
        double total = 0.0;
        for (int b = 0; b < static_cast<int>(opp_dist.size()); ++b) {
          if (opp_dist[b] == 0.0) continue;
          pr[role] = a;
          pr[1 - role] = b;
          double cont = 0.0;
          const std::vector<double>& f = mon.table[role][game.profile_index(pr)];
          for (int s = 0; s < signals; ++s) {
            if (f[s] == 0.0) continue;
            cont += f[s] * std::max(value[aut.step[r][s]], value[r]);
          }
          total += opp_dist[b] * ((1.0 - delta) * game.payoff(role, pr) + delta * cont);
        }
        q[r][ro][a] = total;
      }
    }
  }
  return q;
}

IncentiveReport incentive_gap(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                              const StateDistribution& opp_mu, const std::vector<double>& value,
                              const MonitoringStructure& mon, const StageGame& game, double delta,
                              const IncentiveOptions& options) {
  check_inputs(aut, profile, role, opp_mu, mon, game, delta);
  const RoleStrategy& own = profile.roles[role];
  const RoleStrategy& opp = profile.roles[1 - role];
  const int n = aut.state_count();
  const int opp_states = static_cast<int>(opp_mu.size());
  const auto q = one_shot_values(aut, profile, role, value, mon, game, delta);

  IncentiveReport report;
  report.action_gap.assign(n, std::vector<double>(opp_states, 0.0));
  report.opponent_field.assign(n, std::vector<double>(game.action_count(1 - role), 0.0));
  report.erasure_consistent.assign(n, std::vector<bool>(aut.signal_count(), true));
  report.max_gap = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int ro = 0; ro < opp_states; ++ro) {
      const std::vector<double>& own_dist = own.action_rule[r][ro];
      double best = *std::max_element(q[r][ro].begin(), q[r][ro].end());
      double prescribed = 0.0;
      for (std::size_t a = 0; a < own_dist.size(); ++a) prescribed += own_dist[a] * q[r][ro][a];
      report.action_gap[r][ro] = best - prescribed;
      if (opp_mu[ro] > options.mass_floor)
        report.max_gap = std::max(report.max_gap, report.action_gap[r][ro]);
      const std::vector<double>& opp_dist = opp.action_rule[ro][r];
      for (std::size_t b = 0; b < opp_dist.size(); ++b)
        report.opponent_field[r][b] += opp_mu[ro] * opp_dist[b];
    }
    for (int s = 0; s < aut.signal_count(); ++s) {
      const double kept = value[aut.step[r][s]];
      const double erase_prob = own.erasure_rule[r][s];
      bool ok = true;
      if (kept < value[r] - options.tie_tol) ok = erase_prob >= 1.0 - 1e-12;
      else if (kept > value[r] + options.tie_tol) ok = erase_prob <= 1e-12;
      report.erasure_consistent[r][s] = ok;
      report.erasure_ok = report.erasure_ok && ok;
    }
  }
  return report;
}

double secure_defection_payoff(const RecordAutomaton& aut, const StateDistribution& opp_mu,
                               const RoleStrategy& opponent, const StageGame& game, int role,
                               int action) {
  validate_automaton(aut);
  if (game.role_count() != 2) throw DimensionMismatch("secure payoff is computed for two roles");
  if (action < 0 || action >= game.action_count(role))
    throw DimensionMismatch("secure action out of range");
  std::vector<int> pr(2, 0);
  double flow = 0.0;
  for (std::size_t ro = 0; ro < opp_mu.size(); ++ro) {
    if (opp_mu[ro] == 0.0) continue;
    const std::vector<double>& opp_dist = opponent.action_rule[ro][aut.initial];
    for (std::size_t b = 0; b < opp_dist.size(); ++b) {
      pr[role] = action;
      pr[1 - role] = static_cast<int>(b);
      flow += opp_mu[ro] * opp_dist[b] * game.payoff(role, pr);
    }
  }
  return flow;
}

double secure_defection_payoff(const RecordAutomaton& aut, const StateDistribution& opp_mu,
                               const RoleStrategy& opponent, const StageGame& game, int role) {
  const std::optional<int> star = strictly_dominant_action(game, role);
  if (!star) throw NoDominantAction("the stage game has no strictly dominant action");
  return secure_defection_payoff(aut, opp_mu, opponent, game, role, *star);
}

}  // namespace erec
