#include "erec/record.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "erec/errors.hpp"
#include "json.hpp"

namespace erec {

void validate_automaton(const RecordAutomaton& aut) {
  const int n = aut.state_count();
  if (n < 1) throw StateSpaceMismatch("automaton needs at least one state");
  if (aut.initial < 0 || aut.initial >= n) throw StateSpaceMismatch("initial state out of range");
  if (static_cast<int>(aut.step.size()) != n)
    throw StateSpaceMismatch("step table needs one row per state");
  const int s = aut.signal_count();
  if (s < 1) throw StateSpaceMismatch("automaton needs at least one signal");
  for (const auto& row : aut.step) {
    if (static_cast<int>(row.size()) != s)
      throw StateSpaceMismatch("step table rows must have equal length");
    for (int target : row)
      if (target < 0 || target >= n) throw StateSpaceMismatch("step target out of range");
  }
}

RecordAutomaton junior_senior_automaton() {
  RecordAutomaton aut;
  aut.states = {"Junior", "Senior"};
  aut.initial = 0;
  // Signals are own actions under perfect monitoring: 0 = C, 1 = D.
  aut.step = {{1, 0}, {1, 1}};
  return aut;
}

RecordAutomaton length_counting_automaton(int cap, int signal_count) {
  if (cap < 1) throw NonPositiveParameter("cap must be at least 1");
  if (signal_count < 1) throw NonPositiveParameter("signal_count must be at least 1");
  RecordAutomaton aut;
  aut.initial = 0;
  for (int k = 0; k <= cap; ++k) aut.states.push_back("len" + std::to_string(k));
  aut.step.assign(cap + 1, std::vector<int>(signal_count, 0));
  for (int k = 0; k <= cap; ++k)
    for (int s = 0; s < signal_count; ++s) aut.step[k][s] = std::min(k + 1, cap);
  validate_automaton(aut);
  return aut;
}

std::string automaton_to_json(const RecordAutomaton& aut) {
  nlohmann::ordered_json j;
  j["states"] = aut.states;
  j["initial"] = aut.initial;
  j["step"] = aut.step;
  return j.dump(2) + "\n";
}

RecordAutomaton automaton_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("automaton JSON parse error: ") + e.what());
  }
  RecordAutomaton aut;
  try {
    aut.states = j.at("states").get<std::vector<std::string>>();
    aut.initial = j.at("initial").get<int>();
    aut.step = j.at("step").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("automaton JSON shape error: ") + e.what());
  }
  validate_automaton(aut);
  return aut;
}

void validate_strategy(const RoleStrategy& strategy, const RecordAutomaton& aut,
                       int own_actions, int opp_states) {
  const int n = aut.state_count();
  if (static_cast<int>(strategy.action_rule.size()) != n)
    throw StateSpaceMismatch("action rule needs one row per own state");
  for (const auto& per_opp : strategy.action_rule) {
    if (static_cast<int>(per_opp.size()) != opp_states)
      throw StateSpaceMismatch("action rule needs one entry per opponent state");
    for (const auto& dist : per_opp) {
      if (static_cast<int>(dist.size()) != own_actions)
        throw DimensionMismatch("action distribution length must equal the action count");
      double sum = 0.0;
      for (double p : dist) {
        if (!(p >= 0.0) || !(p <= 1.0))
          throw NonPositiveParameter("action probabilities must lie in [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw NonPositiveParameter("action distributions must sum to 1 within 1e-12");
    }
  }
  if (static_cast<int>(strategy.erasure_rule.size()) != n)
    throw StateSpaceMismatch("erasure rule needs one row per own state");
  for (const auto& row : strategy.erasure_rule) {
    if (static_cast<int>(row.size()) != aut.signal_count())
      throw DimensionMismatch("erasure rule rows must have one entry per signal");
    for (double p : row)
      if (!(p >= 0.0) || !(p <= 1.0))
        throw NonPositiveParameter("erasure probabilities must lie in [0, 1]");
  }
}

TransitionKernel build_kernel(const RecordAutomaton& aut, const RoleStrategy& own,
                              const StateDistribution& opponent_distribution,
                              const RoleStrategy& opponent, const MonitoringStructure& mon,
                              const StageGame& game, int role) {
  validate_automaton(aut);
  if (game.role_count() != 2) throw DimensionMismatch("record kernels are built for two roles");
  if (role != 0 && role != 1) throw DimensionMismatch("role must be 0 or 1");
  const int n = aut.state_count();
  const int opp_states = static_cast<int>(opponent_distribution.size());
  validate_strategy(own, aut, game.action_count(role), opp_states);
  if (mon.signal_count(role) != aut.signal_count())
    throw StateSpaceMismatch("automaton signals must match the role's monitoring signals");

  TransitionKernel kernel;
  kernel.initial = aut.initial;
  kernel.rows.assign(n, std::vector<double>(n, 0.0));
  std::vector<int> profile(2, 0);
  for (int r = 0; r < n; ++r) {
    for (int ro = 0; ro < opp_states; ++ro) {
      const double w = opponent_distribution[ro];
      if (w == 0.0) continue;
      const std::vector<double>& own_dist = own.action_rule[r][ro];
      const std::vector<double>& opp_dist = opponent.action_rule[ro][r];
      for (int a = 0; a < static_cast<int>(own_dist.size()); ++a) {
        if (own_dist[a] == 0.0) continue;
        for (int b = 0; b < static_cast<int>(opp_dist.size()); ++b) {
          if (opp_dist[b] == 0.0) continue;
          profile[role] = a;
          profile[1 - role] = b;
          const double wa = w * own_dist[a] * opp_dist[b];
          const std::vector<double>& f = mon.table[role][game.profile_index(profile)];
          for (int s = 0; s < aut.signal_count(); ++s) {
            if (f[s] == 0.0) continue;
            const double erase = own.erasure_rule[r][s];
            kernel.rows[r][aut.step[r][s]] += wa * f[s] * (1.0 - erase);
            kernel.rows[r][r] += wa * f[s] * erase;
          }
        }
      }
    }
  }
  return kernel;
}

namespace {

void check_kernel(const TransitionKernel& kernel, double bar_delta) {
  const int n = kernel.state_count();
  if (n < 1) throw StateSpaceMismatch("kernel needs at least one state");
  if (kernel.initial < 0 || kernel.initial >= n)
    throw StateSpaceMismatch("kernel newborn state out of range");
  if (!(bar_delta > 0.0) || !(bar_delta < 1.0))
    throw NonPositiveParameter("bar_delta must lie in (0, 1)");
  for (const auto& row : kernel.rows) {
    if (static_cast<int>(row.size()) != n) throw DimensionMismatch("kernel must be square");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw NonPositiveParameter("kernel entries must be nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw NonPositiveParameter("kernel rows must sum to 1");
  }
}

// Roundoff in the stationary solve shrinks the total mass by ~1e-16, and the
// birth-death recursion amplifies any deficit by bar_delta/(1 - bar_delta)
// per solve, so distributions must be projected back onto the simplex.
void normalize_distribution(StateDistribution& mu) {
  double total = 0.0;
  for (double v : mu) total += v;
  if (!(total > 0.0)) throw NonConvergence("stationary distribution lost all mass");
  for (double& v : mu) v /= total;
}

}  // namespace

StateDistribution stationary_distribution(const TransitionKernel& kernel, double bar_delta) {
  check_kernel(kernel, bar_delta);
  const int n = kernel.state_count();
  // Solve (I - bar_delta K^T) mu = (1 - bar_delta) e_initial.
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(c, r) -= bar_delta * kernel.rows[r][c];
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(kernel.initial) = 1.0 - bar_delta;
  const Eigen::VectorXd x = m.partialPivLu().solve(b);
  StateDistribution mu(n);
  for (int i = 0; i < n; ++i) mu[i] = x(i) < 0.0 && x(i) > -1e-12 ? 0.0 : x(i);
  normalize_distribution(mu);
  return mu;
}

StateDistribution stationary_distribution_iterative(const TransitionKernel& kernel,
                                                    double bar_delta, double tol, int max_iter) {
  check_kernel(kernel, bar_delta);
  const int n = kernel.state_count();
  StateDistribution mu(n, 0.0);
  mu[kernel.initial] = 1.0;
  StateDistribution next(n, 0.0);
  for (int it = 0; it < max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    next[kernel.initial] = 1.0 - bar_delta;
    for (int r = 0; r < n; ++r) {
      if (mu[r] == 0.0) continue;
      const double w = bar_delta * mu[r];
      for (int c = 0; c < n; ++c) next[c] += w * kernel.rows[r][c];
    }
    double residual = 0.0;
    for (int i = 0; i < n; ++i) residual = std::max(residual, std::abs(next[i] - mu[i]));
    mu.swap(next);
    if (residual <= tol) {
      normalize_distribution(mu);
      return mu;
    }
  }
  throw NonConvergence("stationary distribution iteration did not reach tolerance");
}

SelfConsistentResult self_consistent_distribution(const RecordAutomaton& aut,
                                                  const StrategyProfile& profile,
                                                  const MonitoringStructure& mon,
                                                  const StageGame& game, double bar_delta,
                                                  const FixedPointOptions& options,
                                                  const std::vector<StateDistribution>* start) {
  validate_automaton(aut);
  if (profile.roles.size() != 2) throw DimensionMismatch("two role strategies required");
  const int n = aut.state_count();
  SelfConsistentResult result;
  if (start != nullptr) {
    if (start->size() != 2 || static_cast<int>((*start)[0].size()) != n ||
        static_cast<int>((*start)[1].size()) != n)
      throw StateSpaceMismatch("warm start must provide two distributions over states");
    result.mu = *start;
  } else {
    result.mu.assign(2, StateDistribution(n, 0.0));
    result.mu[0][aut.initial] = 1.0;
    result.mu[1][aut.initial] = 1.0;
  }
  for (int it = 1; it <= options.max_iter; ++it) {
    double residual = 0.0;
    std::vector<StateDistribution> target(2);
    for (int role = 0; role < 2; ++role) {
      const TransitionKernel kernel = build_kernel(aut, profile.roles[role], result.mu[1 - role],
                                                   profile.roles[1 - role], mon, game, role);
      target[role] = stationary_distribution(kernel, bar_delta);
      for (int i = 0; i < n; ++i)
        residual = std::max(residual, std::abs(target[role][i] - result.mu[role][i]));
    }
    result.iterations = it;
    result.residual = residual;
    for (int role = 0; role < 2; ++role)
      for (int i = 0; i < n; ++i)
        result.mu[role][i] = (1.0 - options.damping) * result.mu[role][i] +
                             options.damping * target[role][i];
    if (residual <= options.tol) return result;
  }
  throw NonConvergence("self-consistent record distribution did not reach tolerance");
}

std::vector<double> average_action_distribution(const StateDistribution& own_mu,
                                                const StateDistribution& opp_mu,
                                                const RoleStrategy& own) {
  if (own_mu.size() != own.action_rule.size())
    throw StateSpaceMismatch("own distribution must cover the strategy's states");
  std::vector<double> avg;
  for (std::size_t r = 0; r < own_mu.size(); ++r) {
    if (own.action_rule[r].size() != opp_mu.size())
      throw StateSpaceMismatch("opponent distribution must cover the strategy's opponent states");
    for (std::size_t ro = 0; ro < opp_mu.size(); ++ro) {
      const std::vector<double>& dist = own.action_rule[r][ro];
      if (avg.empty()) avg.assign(dist.size(), 0.0);
      const double w = own_mu[r] * opp_mu[ro];
      for (std::size_t a = 0; a < dist.size(); ++a) avg[a] += w * dist[a];
    }
  }
  return avg;
}

double average_payoff(const StateDistribution& own_mu, const StateDistribution& opp_mu,
                      const StrategyProfile& profile, const StageGame& game, int role) {
  if (game.role_count() != 2) throw DimensionMismatch("average payoff is computed for two roles");
  const RoleStrategy& own = profile.roles[role];
  const RoleStrategy& opp = profile.roles[1 - role];
  std::vector<int> pr(2, 0);
  double total = 0.0;
  for (std::size_t r = 0; r < own_mu.size(); ++r) {
    for (std::size_t ro = 0; ro < opp_mu.size(); ++ro) {
      const double w = own_mu[r] * opp_mu[ro];
      if (w == 0.0) continue;
      const std::vector<double>& own_dist = own.action_rule[r][ro];
      const std::vector<double>& opp_dist = opp.action_rule[ro][r];
      for (std::size_t a = 0; a < own_dist.size(); ++a) {
        for (std::size_t b = 0; b < opp_dist.size(); ++b) {
          pr[role] = static_cast<int>(a);
          pr[1 - role] = static_cast<int>(b);
          total += w * own_dist[a] * opp_dist[b] * game.payoff(role, pr);
        }
      }
    }
  }
  return total;
}

}  // namespace erec
