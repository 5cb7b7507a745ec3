#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <vector>

#include "erec/errors.hpp"
#include "erec/game.hpp"
#include "erec/junior_senior.hpp"
#include "erec/record.hpp"

using namespace erec;
namespace js = erec::junior_senior;

TEST_CASE("newborn mass has exact closed forms at the mixing endpoints") {
  for (double bar : {0.5, 0.9, 0.99}) {
    CHECK(std::abs(js::mu0_of_q(1.0, bar) - (1.0 - bar)) <= 1e-14);
    const double at_zero = std::min(1.0, (1.0 - bar) / bar);
    CHECK(std::abs(js::mu0_of_q(0.0, bar) - at_zero) <= 1e-14);
  }
}

TEST_CASE("newborn mass satisfies its defining recursion on a grid") {
  for (double bar : {0.55, 0.7, 0.9, 0.99, 0.999}) {
    for (double q = 0.0; q <= 1.0; q += 0.05) {
      const double mu0 = js::mu0_of_q(q, bar);
      CHECK(mu0 >= 0.0);
      CHECK(mu0 <= 1.0);
      const double residual = mu0 - ((1.0 - bar) + bar * mu0 * mu0 * (1.0 - q));
      CHECK(std::abs(residual) <= 1e-12);
    }
  }
}

TEST_CASE("the worked equilibrium reproduces frozen values") {
  const auto eq = js::solve(2.0, 1.0, 0.95, 0.90);
  REQUIRE(eq.has_value());
  CHECK(eq->delta == doctest::Approx(0.855).epsilon(1e-12));
  CHECK(eq->q == doctest::Approx(0.11457191789123264).epsilon(1e-12));
  CHECK(eq->mu0 == doctest::Approx(0.10956645470921667).epsilon(1e-12));
  CHECK(eq->mu1 == doctest::Approx(1.0 - 0.10956645470921667).epsilon(1e-12));
  CHECK(eq->v0 == doctest::Approx(0.1396783955963883).epsilon(1e-12));
  CHECK(eq->v1 == doctest::Approx(0.32869936412765).epsilon(1e-11));
  CHECK(eq->margin_senior_vs_c == doctest::Approx(0.29).epsilon(1e-12));
  CHECK(eq->margin_senior_vs_d == doctest::Approx(0.145).epsilon(1e-12));
  CHECK(eq->margin_junior_vs_senior == doctest::Approx(0.016612928094228735).epsilon(1e-11));
  CHECK(eq->margin_always_defect == doctest::Approx(0.10201867903865482).epsilon(1e-11));
  CHECK(std::abs(eq->margin_indifference) <= 1e-12);
  CHECK_FALSE(eq->degenerate);
  CHECK(js::average_cooperation(*eq) == doctest::Approx(0.09893706058786479).epsilon(1e-11));
  CHECK(js::average_payoff_analytic(*eq) == doctest::Approx(0.1977165373700397).epsilon(1e-11));
}

TEST_CASE("solved equilibria satisfy the closed-form identities on a grid") {
  for (double g : {1.5, 2.0, 3.0}) {
    for (double l : {0.5, 1.0}) {
      for (double hat : {0.9, 0.95, 0.99}) {
        const auto closed = js::feasibility_interval_closed_form(g, l, hat);
        REQUIRE(closed.has_value());
        for (int i = 1; i <= 8; ++i) {
          const double bar =
              closed->lo + (closed->hi - closed->lo) * static_cast<double>(i) / 9.0;
          const auto eq = js::solve(g, l, hat, bar);
          REQUIRE(eq.has_value());
          const double delta = hat * bar;

          // Value gap between the two record states.
          const double gap = (1.0 - delta) / delta * (eq->q * g + (1.0 - eq->q) * l);
          CHECK(std::abs(eq->v1 - eq->v0 - gap) <= 1e-9);
          // Junior value identity.
          CHECK(std::abs(eq->v0 - eq->q * (eq->mu0 + g - eq->mu1 * l)) <= 1e-9);
          // Senior value from the newborn mass.
          CHECK(std::abs(eq->v1 - eq->mu0 * (1.0 + g)) <= 1e-9);
          // Newborn-mass recursion at the solved mixing weight.
          const double rec =
              eq->mu0 - ((1.0 - bar) + bar * eq->mu0 * eq->mu0 * (1.0 - eq->q));
          CHECK(std::abs(rec) <= 1e-9);
          CHECK_NOTHROW(js::verify(*eq, 1e-9));
        }
      }
    }
  }
}

TEST_CASE("verification rejects tampered solutions") {
  auto eq = *js::solve(2.0, 1.0, 0.95, 0.90);
  CHECK_NOTHROW(js::verify(eq, 1e-9));
  auto wrong_q = eq;
  wrong_q.q += 1e-4;
  CHECK_THROWS_AS(js::verify(wrong_q, 1e-9), VerificationFailure);
  auto wrong_mass = eq;
  wrong_mass.mu0 *= 1.0 + 1e-6;
  CHECK_THROWS_AS(js::verify(wrong_mass, 1e-9), VerificationFailure);
  auto wrong_value = eq;
  wrong_value.v1 -= 1e-6;
  CHECK_THROWS_AS(js::verify(wrong_value, 1e-9), VerificationFailure);
}

TEST_CASE("existence threshold separates solvable from unsolvable demographics") {
  const double g = 2.0;
  const double l = 1.0;
  const double hat = 0.95;
  const auto closed = js::feasibility_interval_closed_form(g, l, hat);
  REQUIRE(closed.has_value());
  CHECK(closed->lo == doctest::Approx(l / ((1.0 + g + l) * hat)).epsilon(1e-15));
  const double beta = l / (1.0 + g);
  CHECK(closed->hi == doctest::Approx((hat - beta) / (hat * (1.0 - beta))).epsilon(1e-15));

  // Strictly inside / outside the interval.
  CHECK(js::solve(g, l, hat, closed->lo + 1e-6).has_value());
  CHECK(js::solve(g, l, hat, closed->hi - 1e-6).has_value());
  CHECK_FALSE(js::solve(g, l, hat, closed->lo - 1e-6).has_value());
  CHECK_FALSE(js::solve(g, l, hat, closed->hi + 1e-6).has_value());

  const auto inside = js::existence_condition(g, l, hat, 0.5);
  CHECK(inside.holds_written);
  CHECK(inside.holds_binding);
  const auto outside = js::existence_condition(g, l, hat, 0.999);
  CHECK_FALSE(outside.holds_binding);
}

TEST_CASE("scanned feasibility interval matches the closed form") {
  const double res = 1e-4;
  for (double hat : {0.95, 0.99}) {
    const auto closed = js::feasibility_interval_closed_form(2.0, 1.0, hat);
    const auto scanned = js::feasibility_interval(2.0, 1.0, hat, res);
    REQUIRE(closed.has_value());
    REQUIRE(scanned.has_value());
    CHECK(std::abs(scanned->lo - closed->lo) <= res + 1e-12);
    CHECK(std::abs(scanned->hi - closed->hi) <= res + 1e-12);
  }
  // Impatient players cannot sustain mixing at any survival rate.
  CHECK_FALSE(js::feasibility_interval_closed_form(2.0, 1.0, 0.10).has_value());
  CHECK_FALSE(js::feasibility_interval(2.0, 1.0, 0.10, res).has_value());
}

TEST_CASE("closed-form demographics for patient players") {
  const auto a = js::feasibility_interval_closed_form(2.0, 1.0, 0.95);
  REQUIRE(a.has_value());
  CHECK(a->lo == doctest::Approx(0.26315789473684209).epsilon(1e-12));
  CHECK(a->hi == doctest::Approx(0.97368421052631582).epsilon(1e-12));
  const auto b = js::feasibility_interval_closed_form(2.0, 1.0, 0.99);
  REQUIRE(b.has_value());
  CHECK(b->lo == doctest::Approx(0.25252525252525254).epsilon(1e-12));
  CHECK(b->hi == doctest::Approx(0.99494949494949492).epsilon(1e-12));
}

TEST_CASE("strategy tables encode the mixing equilibrium") {
  const double q = 0.25;
  const RoleStrategy role = js::strategy(q);
  REQUIRE(role.action_rule.size() == 2);
  CHECK(role.action_rule[0][0][0] == doctest::Approx(q));
  CHECK(role.action_rule[0][0][1] == doctest::Approx(1.0 - q));
  CHECK(role.action_rule[0][1][0] == 1.0);  // junior cooperates on seniors
  CHECK(role.action_rule[1][0][1] == 1.0);  // seniors always defect
  CHECK(role.action_rule[1][1][1] == 1.0);
  for (const auto& row : role.erasure_rule)
    for (double e : row) CHECK(e == 0.0);

  const StrategyProfile profile = js::profile(q);
  REQUIRE(profile.roles.size() == 2);
  const RecordAutomaton aut = junior_senior_automaton();
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  CHECK_NOTHROW(validate_strategy(profile.roles[0], aut, 2, 2));
  CHECK_NOTHROW(validate_strategy(profile.roles[1], aut, 2, 2));
  CHECK_THROWS_AS(js::strategy(1.5), NonPositiveParameter);
}

TEST_CASE("analytic population shares agree with the record machine") {
  const auto eq = *js::solve(2.0, 1.0, 0.95, 0.90);
  const StageGame game = make_prisoners_dilemma(2.0, 1.0);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();
  const StrategyProfile profile = js::profile(eq.q);

  const SelfConsistentResult fixed =
      self_consistent_distribution(aut, profile, mon, game, eq.bar_delta);
  CHECK(std::abs(fixed.mu[0][0] - eq.mu0) <= 1e-9);
  CHECK(std::abs(fixed.mu[0][1] - eq.mu1) <= 1e-9);

  const double machine_payoff =
      average_payoff(fixed.mu[0], fixed.mu[1], profile, game, 0);
  CHECK(machine_payoff == doctest::Approx(js::average_payoff_analytic(eq)).epsilon(1e-9));
  const std::vector<double> actions =
      average_action_distribution(fixed.mu[0], fixed.mu[1], profile.roles[0]);
  CHECK(actions[0] == doctest::Approx(js::average_cooperation(eq)).epsilon(1e-9));
}

TEST_CASE("construction requires a strictly submodular dilemma") {
  CHECK_THROWS_AS(js::solve(1.0, 1.0, 0.95, 0.90), NotSubmodular);
  CHECK_THROWS_AS(js::solve(0.5, 1.0, 0.95, 0.90), NotSubmodular);
  CHECK_THROWS_AS(js::feasibility_interval_closed_form(1.0, 2.0, 0.95), NotSubmodular);
  CHECK_THROWS_AS(js::solve(2.0, 1.0, 1.05, 0.90), NonPositiveParameter);
  CHECK_THROWS_AS(js::solve(2.0, 1.0, 0.95, 0.0), NonPositiveParameter);
}

TEST_CASE("solves are fast enough for dense scans") {
  const auto start = std::chrono::steady_clock::now();
  int solved = 0;
  for (int i = 0; i < 200; ++i) {
    const double bar = 0.30 + 0.65 * static_cast<double>(i) / 199.0;
    if (js::solve(2.0, 1.0, 0.95, bar).has_value()) ++solved;
  }
  const auto elapsed = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - start).count();
  CHECK(solved == 200);
  CHECK(elapsed < 2.0);  // budget of 10ms per solve
}
