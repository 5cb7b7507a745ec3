#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "erec/errors.hpp"
#include "erec/game.hpp"
#include "erec/junior_senior.hpp"
#include "erec/record.hpp"

using namespace erec;

namespace {

/** Strategy that mixes uniformly over actions and erases each signal with probability e. */
RoleStrategy uniform_strategy(int states, int opp_states, int actions, double erase) {
  RoleStrategy s;
  s.action_rule.assign(states, std::vector<std::vector<double>>(
                                   opp_states, std::vector<double>(actions, 1.0 / actions)));
  s.erasure_rule.assign(states, std::vector<double>(2, erase));
  return s;
}

/** Monitoring with a single always-on signal per role (records see nothing). */
MonitoringStructure blind_monitoring(const StageGame& game) {
  MonitoringStructure mon;
  mon.signals = {{"tick"}, {"tick"}};
  mon.table.assign(2, std::vector<std::vector<double>>(
                          static_cast<std::size_t>(game.profile_count()), {1.0}));
  return mon;
}

}  // namespace

TEST_CASE("two-state automaton has the canonical shape") {
  const RecordAutomaton aut = junior_senior_automaton();
  validate_automaton(aut);
  REQUIRE(aut.state_count() == 2);
  REQUIRE(aut.signal_count() == 2);
  CHECK(aut.initial == 0);
  // A kept cooperation signal promotes a junior; a kept defection signal
  // leaves the record unchanged; seniors stay seniors.
  CHECK(aut.step[0][0] == 1);
  CHECK(aut.step[0][1] == 0);
  CHECK(aut.step[1][0] == 1);
  CHECK(aut.step[1][1] == 1);
}

TEST_CASE("automaton validation rejects malformed machines") {
  RecordAutomaton aut = junior_senior_automaton();
  SUBCASE("initial out of range") {
    aut.initial = 2;
    CHECK_THROWS_AS(validate_automaton(aut), StateSpaceMismatch);
  }
  SUBCASE("step target out of range") {
    aut.step[0][1] = 5;
    CHECK_THROWS_AS(validate_automaton(aut), StateSpaceMismatch);
  }
  SUBCASE("ragged step table") {
    aut.step[1].pop_back();
    CHECK_THROWS_AS(validate_automaton(aut), StateSpaceMismatch);
  }
}

TEST_CASE("automaton json serialization round trips") {
  const RecordAutomaton aut = length_counting_automaton(3, 2);
  const RecordAutomaton back = automaton_from_json(automaton_to_json(aut));
  CHECK(back.states == aut.states);
  CHECK(back.initial == aut.initial);
  CHECK(back.step == aut.step);
  CHECK_THROWS_AS(automaton_from_json("{ not json"), ConfigInvalid);
}

TEST_CASE("hand-computed kernel for a half-mixing, half-erasing record") {
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();
  const RoleStrategy own = uniform_strategy(2, 2, 2, 0.5);
  const RoleStrategy opp = uniform_strategy(2, 2, 2, 0.0);
  const StateDistribution opp_mu = {0.3, 0.7};

  const TransitionKernel kernel = build_kernel(aut, own, opp_mu, opp, mon, game, 0);
  // From Junior: own C (prob 1/2) promotes if kept (prob 1/2); everything
  // else stays. From Senior: both signals land back on Senior.
  CHECK(kernel.rows[0][0] == doctest::Approx(0.75));
  CHECK(kernel.rows[0][1] == doctest::Approx(0.25));
  CHECK(kernel.rows[1][0] == doctest::Approx(0.0));
  CHECK(kernel.rows[1][1] == doctest::Approx(1.0));
  CHECK(kernel.initial == 0);

  // mu0 = (1-bar) + bar * 0.75 * mu0 at bar = 0.8 gives exactly 1/2.
  const StateDistribution mu = stationary_distribution(kernel, 0.8);
  CHECK(mu[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mu[1] == doctest::Approx(0.5).epsilon(1e-12));

  const StateDistribution mu_iter = stationary_distribution_iterative(kernel, 0.8, 1e-14, 200000);
  CHECK(mu_iter[0] == doctest::Approx(mu[0]).epsilon(1e-10));
  CHECK(mu_iter[1] == doctest::Approx(mu[1]).epsilon(1e-10));
}

TEST_CASE("erasing every signal pins the record at the newborn state") {
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();
  const RoleStrategy own = uniform_strategy(2, 2, 2, 1.0);
  const RoleStrategy opp = uniform_strategy(2, 2, 2, 0.0);
  const TransitionKernel kernel = build_kernel(aut, own, {0.5, 0.5}, opp, mon, game, 0);
  for (int r = 0; r < 2; ++r) {
    CHECK(kernel.rows[r][r] == doctest::Approx(1.0));
  }
  const StateDistribution mu = stationary_distribution(kernel, 0.9);
  CHECK(mu[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu[1] == doctest::Approx(0.0));
}

TEST_CASE("record-length distribution matches the birth-death closed form") {
  // One uninformative signal, never erase: the record length counts age,
  // so the steady state is geometric in the survival probability.
  const double bar_delta = 0.7;
  const int cap = 5;
  const StageGame game = make_prisoners_dilemma(1.0, 0.5);
  const MonitoringStructure mon = blind_monitoring(game);
  const RecordAutomaton aut = length_counting_automaton(cap, 1);

  RoleStrategy own;
  own.action_rule.assign(cap + 1, std::vector<std::vector<double>>(
                                      cap + 1, std::vector<double>{1.0, 0.0}));
  own.erasure_rule.assign(cap + 1, std::vector<double>(1, 0.0));
  const RoleStrategy opp = own;

  StateDistribution opp_mu(cap + 1, 1.0 / (cap + 1));
  const TransitionKernel kernel = build_kernel(aut, own, opp_mu, opp, mon, game, 0);
  const StateDistribution mu = stationary_distribution(kernel, bar_delta);
  for (int k = 0; k < cap; ++k) {
    CHECK(mu[k] == doctest::Approx((1.0 - bar_delta) * std::pow(bar_delta, k)).epsilon(1e-12));
  }
  CHECK(mu[cap] == doctest::Approx(std::pow(bar_delta, cap)).epsilon(1e-12));
}

TEST_CASE("kernel agrees with a direct monte-carlo of the period law") {
  // Independent oracle: simulate one record through (action, signal, erase,
  // death) draws from the primitives and compare the occupancy frequencies
  // with the solved stationary distribution.
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();
  const double q = 0.35;
  const double erase_on_defect = 0.4;
  const double bar_delta = 0.85;

  RoleStrategy own;
  own.action_rule = {{{q, 1.0 - q}, {1.0, 0.0}}, {{0.2, 0.8}, {0.6, 0.4}}};
  own.erasure_rule = {{0.0, erase_on_defect}, {0.1, 0.0}};
  const RoleStrategy opp = uniform_strategy(2, 2, 2, 0.0);
  const StateDistribution opp_mu = {0.4, 0.6};

  const TransitionKernel kernel = build_kernel(aut, own, opp_mu, opp, mon, game, 0);
  const StateDistribution mu = stationary_distribution(kernel, bar_delta);

  std::mt19937 rng(20260814u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const long steps = 2000000;
  std::vector<long> visits(2, 0);
  int state = aut.initial;
  for (long t = 0; t < steps; ++t) {
    ++visits[state];
    const int opp_state = unit(rng) < opp_mu[0] ? 0 : 1;
    const int action = unit(rng) < own.action_rule[state][opp_state][0] ? 0 : 1;
    // Perfect monitoring: the signal is the own action.
    const int signal = action;
    if (unit(rng) >= own.erasure_rule[state][signal]) state = aut.step[state][signal];
    if (unit(rng) >= bar_delta) state = aut.initial;
  }
  for (int r = 0; r < 2; ++r) {
    const double freq = static_cast<double>(visits[r]) / static_cast<double>(steps);
    CHECK(std::abs(freq - mu[r]) < 3e-3);
  }
}

TEST_CASE("random profiles keep kernels stochastic and steady states normalized") {
  const StageGame game = make_prisoners_dilemma(1.5, 0.8);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = length_counting_automaton(3, 2);
  const int n = aut.state_count();

  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    RoleStrategy own;
    own.action_rule.assign(n, std::vector<std::vector<double>>(n));
    own.erasure_rule.assign(n, std::vector<double>(2));
    for (int r = 0; r < n; ++r) {
      for (int ro = 0; ro < n; ++ro) {
        const double p = unit(rng);
        own.action_rule[r][ro] = {p, 1.0 - p};
      }
      own.erasure_rule[r] = {unit(rng), unit(rng)};
    }
    StateDistribution opp_mu(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += opp_mu[i] = unit(rng) + 1e-3;
    for (int i = 0; i < n; ++i) opp_mu[i] /= total;

    const TransitionKernel kernel = build_kernel(aut, own, opp_mu, own, mon, game, 0);
    for (const auto& row : kernel.rows) {
      double sum = 0.0;
      for (double p : row) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    const double bar = 0.2 + 0.75 * unit(rng);
    const StateDistribution mu = stationary_distribution(kernel, bar);
    double sum = 0.0;
    for (double p : mu) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    const StateDistribution mu_iter = stationary_distribution_iterative(kernel, bar, 1e-13);
    for (int i = 0; i < n; ++i) CHECK(std::abs(mu[i] - mu_iter[i]) < 1e-9);
  }
}

TEST_CASE("self-consistent distribution reproduces the analytic junior share") {
  const auto eq = junior_senior::solve(2.0, 1.0, 0.95, 0.90);
  REQUIRE(eq.has_value());
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();
  const StrategyProfile profile = junior_senior::profile(eq->q);

  FixedPointOptions options;
  options.tol = 1e-12;
  const SelfConsistentResult fixed =
      self_consistent_distribution(aut, profile, mon, game, 0.90, options);
  CHECK(fixed.residual <= 1e-12);
  CHECK(fixed.mu[0][0] == doctest::Approx(eq->mu0).epsilon(1e-10));
  CHECK(fixed.mu[1][0] == doctest::Approx(eq->mu0).epsilon(1e-10));
  CHECK(fixed.mu[0][0] + fixed.mu[0][1] == doctest::Approx(1.0).epsilon(1e-12));

  // The steady-state recursion holds at the fixed point.
  const double mu0 = fixed.mu[0][0];
  CHECK(mu0 == doctest::Approx((1.0 - 0.90) + 0.90 * mu0 * mu0 * (1.0 - eq->q)).epsilon(1e-9));

  // Warm starts do not change the answer.
  const SelfConsistentResult warm =
      self_consistent_distribution(aut, profile, mon, game, 0.90, options, &fixed.mu);
  CHECK(warm.mu[0][0] == doctest::Approx(mu0).epsilon(1e-11));
  CHECK(warm.iterations <= fixed.iterations);
}

TEST_CASE("population action shares and payoffs match direct enumeration") {
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const double q = 0.5;
  const StrategyProfile profile = junior_senior::profile(q);
  const StateDistribution mu = {0.5, 0.5};

  const std::vector<double> actions = average_action_distribution(mu, mu, profile.roles[0]);
  // P(C) = mu0 (mu0 q + mu1): juniors mix against juniors, cooperate
  // against seniors, seniors always defect.
  CHECK(actions[0] == doctest::Approx(0.5 * (0.5 * q + 0.5)).epsilon(1e-12));
  CHECK(actions[0] + actions[1] == doctest::Approx(1.0).epsilon(1e-12));

  double expected = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int ro = 0; ro < 2; ++ro) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          expected += mu[r] * mu[ro] * profile.roles[0].action_rule[r][ro][a] *
                      profile.roles[1].action_rule[ro][r][b] * game.payoff2(0, a, b);
        }
      }
    }
  }
  CHECK(average_payoff(mu, mu, profile, game, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("strategy validation rejects inconsistent shapes") {
  const RecordAutomaton aut = junior_senior_automaton();
  RoleStrategy strategy = junior_senior::strategy(0.5);
  SUBCASE("valid baseline") { validate_strategy(strategy, aut, 2, 2); }
  SUBCASE("action row does not sum to one") {
    strategy.action_rule[0][0] = {0.7, 0.7};
    CHECK_THROWS_AS(validate_strategy(strategy, aut, 2, 2), NonPositiveParameter);
  }
  SUBCASE("missing opponent column") {
    strategy.action_rule[0].pop_back();
    CHECK_THROWS_AS(validate_strategy(strategy, aut, 2, 2), StateSpaceMismatch);
  }
  SUBCASE("erasure probability out of range") {
    strategy.erasure_rule[1][0] = 1.5;
    CHECK_THROWS_AS(validate_strategy(strategy, aut, 2, 2), NonPositiveParameter);
  }
  SUBCASE("wrong action count") {
    CHECK_THROWS_AS(validate_strategy(strategy, aut, 3, 2), DimensionMismatch);
  }
}

TEST_CASE("stationary solve validates the survival probability") {
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();
  const RoleStrategy own = uniform_strategy(2, 2, 2, 0.0);
  const TransitionKernel kernel = build_kernel(aut, own, {1.0, 0.0}, own, mon, game, 0);
  CHECK_THROWS_AS(stationary_distribution(kernel, 0.0), NonPositiveParameter);
  CHECK_THROWS_AS(stationary_distribution(kernel, 1.0), NonPositiveParameter);
}
