#include "erec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erec/errors.hpp"
#include "erec/value.hpp"

namespace erec::bounds {

namespace {

constexpr double kMassFloor = 1e-15;
constexpr double kInequalityTol = 1e-9;
constexpr double kIdentityTol = 1e-7;

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

InequalityCheck upper_check(std::string name, int band, double lhs, double rhs, bool required,
                            bool applicable = true) {
  InequalityCheck c;
  c.name = std::move(name);
  c.band = band;
  c.lhs = lhs;
  c.rhs = rhs;
  c.applicable = applicable;
  c.required = required;
  c.holds = !applicable || lhs <= rhs + kInequalityTol;
  return c;
}

InequalityCheck identity_check(std::string name, int band, double lhs, double rhs) {
  InequalityCheck c;
  c.name = std::move(name);
  c.band = band;
  c.lhs = lhs;
  c.rhs = rhs;
  c.required = true;
  c.holds = std::abs(lhs - rhs) <= kIdentityTol * std::max(1.0, std::abs(rhs));
  return c;
}

}  // namespace

ChainConstants chain_constants(const StageGame& game, const MonitoringStructure& mon, int role,
                               double delta) {
  validate_game(game);
  validate_monitoring(mon, game);
  if (delta <= 0.0 || delta >= 1.0) {
    throw NonPositiveParameter("effective discount factor must lie in (0, 1)");
  }
  const auto dominant = strictly_dominant_action(game, role);
  if (!dominant) throw NoDominantAction("role has no strictly dominant action");
  const SupportCheck support = non_shifting_support(mon, game, role);
  if (!support.holds) throw SupportShifts("monitoring violates non-shifting support");

  ChainConstants k;
  k.dominant_action = *dominant;
  k.eta = support.eta;
  k.delta = delta;

  k.v_max = -std::numeric_limits<double>::infinity();
  k.v_min = std::numeric_limits<double>::infinity();
  k.c_star = -std::numeric_limits<double>::infinity();
  k.c_min = std::numeric_limits<double>::infinity();
  for (int p = 0; p < game.profile_count(); ++p) {
    std::vector<int> profile = game.profile_actions(p);
    const double u = game.payoff(role, profile);
    k.v_max = std::max(k.v_max, u);
    k.v_min = std::min(k.v_min, u);
    if (profile[role] != *dominant) {
      std::vector<int> best = profile;
      best[role] = *dominant;
      const double cost = game.payoff(role, best) - u;
      k.c_star = std::max(k.c_star, cost);
      k.c_min = std::min(k.c_min, cost);
    }
  }

  k.d_big = (k.v_max - k.v_min) / k.eta;
  if (k.d_big < k.c_star) {
    throw VerificationFailure("value-jump bound fell below the deviation cost");
  }
  k.k_bound = (k.v_max - k.v_min) / k.c_star * 2.0 * delta / (1.0 - delta) + 1.0;
  k.x_big = 2.0 * k.d_big / k.c_star;
  k.band_width = (1.0 - delta) * k.c_star / (2.0 * delta);
  return k;
}

RecordBound record_bound(const ChainConstants& constants, double bar_delta) {
  if (bar_delta < 0.0 || bar_delta > 1.0) {
    throw NonPositiveParameter("survival probability must lie in [0, 1]");
  }
  RecordBound b;
  b.log2_value = std::floor(constants.k_bound) + std::log2(constants.x_big) +
                 std::log2(1.0 - bar_delta);
  b.value = std::exp2(b.log2_value);
  b.vacuous = b.log2_value > 0.0;
  return b;
}

std::optional<double> bar_delta_for_bound(const StageGame& game, const MonitoringStructure& mon,
                                          int role, double hat_delta, double target,
                                          double resolution) {
  if (hat_delta <= 0.0 || hat_delta >= 1.0) {
    throw NonPositiveParameter("time preference must lie in (0, 1)");
  }
  if (target <= 0.0) throw NonPositiveParameter("bound target must be positive");
  if (resolution <= 0.0 || resolution >= 1.0) {
    throw NonPositiveParameter("scan resolution must lie in (0, 1)");
  }
  ChainConstants base = chain_constants(game, mon, role, 0.5);
  const double span = base.v_max - base.v_min;
  const double log2_target = std::log2(target);
  const int steps = static_cast<int>(std::floor(1.0 / resolution));
  for (int i = 1; i < steps; ++i) {
    const double bar_delta = i * resolution;
    const double delta = hat_delta * bar_delta;
    const double k_bound = span / base.c_star * 2.0 * delta / (1.0 - delta) + 1.0;
    const double log2_bound =
        std::floor(k_bound) + std::log2(base.x_big) + std::log2(1.0 - bar_delta);
    if (log2_bound <= log2_target) return bar_delta;
  }
  return std::nullopt;
}

BandReport band_decomposition(const RecordAutomaton& aut, const StrategyProfile& profile, int role,
                              const StateDistribution& own_mu, const StateDistribution& opp_mu,
                              const std::vector<double>& value, const MonitoringStructure& mon,
                              const StageGame& game, const ChainConstants& constants,
                              double bar_delta, double certification_tol) {
  validate_automaton(aut);
  const int n = aut.state_count();
  if (static_cast<int>(own_mu.size()) != n || static_cast<int>(value.size()) != n) {
    throw StateSpaceMismatch("state distribution or value size differs from the automaton");
  }
  const double delta = constants.delta;
  const IncentiveReport audit =
      incentive_gap(aut, profile, role, opp_mu, value, mon, game, delta);
  if (!audit.certified(certification_tol)) {
    throw NotCertified("profile fails the one-shot deviation audit");
  }

  BandReport report;
  report.width = constants.band_width;
  report.anchor = value[aut.initial];
  report.band_of_state.assign(n, -1);
  for (int r = 0; r < n; ++r) {
    if (own_mu[r] <= kMassFloor) continue;
    double gap = value[r] - report.anchor;
    if (gap < -1e-9) {
      throw VerificationFailure("positive-mass record valued below the initial record");
    }
    gap = std::max(gap, 0.0);
    report.band_of_state[r] = static_cast<int>(std::floor(gap / report.width));
  }

  std::vector<int> occupied;
  for (int r = 0; r < n; ++r) {
    const int b = report.band_of_state[r];
    if (b >= 0 && std::find(occupied.begin(), occupied.end(), b) == occupied.end()) {
      occupied.push_back(b);
    }
  }
  std::sort(occupied.begin(), occupied.end());
  const int nb = static_cast<int>(occupied.size());
  const auto slot_of = [&occupied](int band) {
    return static_cast<int>(std::lower_bound(occupied.begin(), occupied.end(), band) -
                            occupied.begin());
  };
  report.max_band_index = occupied.back();

  const RoleStrategy& own = profile.roles[role];
  const RoleStrategy& opp = profile.roles[1 - role];
  const int own_actions = game.action_count(role);
  const int opp_actions = game.action_count(1 - role);
  const int a_star = constants.dominant_action;

  // Per-state one-period law under the equilibrium erasure rule, split by
  // whether the own action is the dominant one, plus the keep-optimal value
  // gain that the deviation incentive prices.
  std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> next_dev(n, std::vector<double>(n, 0.0));
  std::vector<double> pi(n, 0.0);
  std::vector<double> dev_gain_weighted(n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int rb = 0; rb < n; ++rb) {
      if (opp_mu[rb] == 0.0) continue;
      for (int a = 0; a < own_actions; ++a) {
        const double pa = own.action_rule[r][rb][a];
        if (pa == 0.0) continue;
        for (int b = 0; b < opp_actions; ++b) {
          const double pb = opp.action_rule[rb][r][b];
          if (pb == 0.0) continue;
          const double w = opp_mu[rb] * pa * pb;
          const std::vector<int> acts = role == 0 ? std::vector<int>{a, b}
                                                  : std::vector<int>{b, a};
          const int pidx = game.profile_index(acts);
          for (int s = 0; s < mon.signal_count(role); ++s) {
            const double fs = mon.table[role][pidx][s];
            if (fs == 0.0) continue;
            const int kept = aut.step[r][s];
            const double keep_prob = 1.0 - own.erasure_rule[r][s];
            const double ws = w * fs;
            next[r][kept] += ws * keep_prob;
            next[r][r] += ws * (1.0 - keep_prob);
            if (a != a_star) {
              next_dev[r][kept] += ws * keep_prob;
              next_dev[r][r] += ws * (1.0 - keep_prob);
              pi[r] += ws;
              dev_gain_weighted[r] += ws * (std::max(value[kept], value[r]) - value[r]);
            }
          }
        }
      }
    }
  }

  report.bands.assign(nb, BandStats{});
  report.flow.assign(nb, std::vector<double>(nb, 0.0));
  std::vector<double> deviant_mass(nb, 0.0);
  std::vector<double> deviant_stay_weighted(nb, 0.0);
  std::vector<double> deviant_gain_weighted(nb, 0.0);
  report.average_nondominant = 0.0;
  report.downward_flow = 0.0;
  for (int r = 0; r < n; ++r) {
    const int band = report.band_of_state[r];
    if (band < 0) continue;
    const int j = slot_of(band);
    BandStats& stats = report.bands[j];
    stats.index = band;
    stats.mass += own_mu[r];
    stats.nondominant += own_mu[r] * pi[r];
    report.average_nondominant += own_mu[r] * pi[r];
    deviant_mass[j] += own_mu[r] * pi[r];
    for (int r2 = 0; r2 < n; ++r2) {
      const int band2 = report.band_of_state[r2];
      if (band2 < 0) {
        if (next[r][r2] > 0.0) {
          // Mass-bearing states can only step to states with (eventual) mass;
          // transient targets below the floor are counted with their band by
          // value so the flow matrix stays stochastic.
          const int implied =
              static_cast<int>(std::floor(std::max(value[r2] - report.anchor, 0.0) / report.width));
          const int jj = slot_of(std::min(implied, occupied.back()));
          report.flow[j][jj] += own_mu[r] * next[r][r2];
          if (occupied[jj] < band) report.downward_flow += own_mu[r] * next[r][r2];
          if (occupied[jj] == band) stats.stay += own_mu[r] * next[r][r2];
        }
        continue;
      }
      const int jj = slot_of(band2);
      report.flow[j][jj] += own_mu[r] * next[r][r2];
      if (band2 == band) {
        stats.stay += own_mu[r] * next[r][r2];
        deviant_stay_weighted[j] += own_mu[r] * next_dev[r][r2];
      }
      if (band2 < band) report.downward_flow += own_mu[r] * next[r][r2];
    }
    deviant_gain_weighted[j] += own_mu[r] * dev_gain_weighted[r];
  }

  for (int j = 0; j < nb; ++j) {
    BandStats& stats = report.bands[j];
    stats.stay /= stats.mass;
    stats.nondominant /= stats.mass;
    if (deviant_mass[j] > kMassFloor) {
      stats.deviant_stay = deviant_stay_weighted[j] / deviant_mass[j];
      stats.deviant_gain = deviant_gain_weighted[j] / deviant_mass[j];
    } else {
      stats.deviant_stay = quiet_nan();
      stats.deviant_gain = quiet_nan();
    }
    for (int k = 0; k < nb; ++k) report.flow[j][k] /= stats.mass;
  }

  report.bound = record_bound(constants, bar_delta);

  auto& checks = report.checks;
  const double dev_rhs = (1.0 - delta) / delta;
  for (int j = 0; j < nb; ++j) {
    const BandStats& stats = report.bands[j];
    const bool deviates = deviant_mass[j] > kMassFloor;
    checks.push_back(upper_check("deviant_continuation_gain", stats.index,
                                 dev_rhs * constants.c_star,
                                 deviates ? stats.deviant_gain : quiet_nan(),
                                 /*required=*/false, deviates));
    checks.push_back(upper_check("deviant_continuation_gain_min", stats.index,
                                 dev_rhs * constants.c_min,
                                 deviates ? stats.deviant_gain : quiet_nan(),
                                 /*required=*/false, deviates));
    checks.push_back(upper_check("deviant_stay", stats.index, deviates ? stats.deviant_stay : 0.0,
                                 1.0 - constants.c_star / (2.0 * constants.d_big),
                                 /*required=*/false, deviates));
    checks.push_back(upper_check("deviant_stay_min", stats.index,
                                 deviates ? stats.deviant_stay : 0.0,
                                 1.0 - constants.c_min / (2.0 * constants.d_big),
                                 /*required=*/false, deviates));
    checks.push_back(upper_check("band_stay", stats.index, stats.stay,
                                 1.0 - stats.nondominant * constants.c_star /
                                           (2.0 * constants.d_big),
                                 /*required=*/false));
    checks.push_back(upper_check("band_stay_min", stats.index, stats.stay,
                                 1.0 - stats.nondominant * constants.c_min /
                                           (2.0 * constants.d_big),
                                 /*required=*/false));
  }

  const BandStats& base = report.bands[0];
  if (base.index != 0) {
    throw VerificationFailure("initial record fell outside the base band");
  }
  checks.push_back(identity_check("base_band_mass_identity", 0, base.mass,
                                  (1.0 - bar_delta) / (1.0 - bar_delta * base.stay)));
  checks.push_back(upper_check("base_band_outflow", 0, base.mass * (1.0 - base.stay),
                               1.0 - bar_delta, /*required=*/true));

  double outflow_total = base.mass * (1.0 - base.stay);
  for (int j = 1; j < nb; ++j) {
    const BandStats& stats = report.bands[j];
    double inflow = 0.0;
    for (int i = 0; i < j; ++i) inflow += report.bands[i].mass * report.flow[i][j];
    checks.push_back(identity_check("band_inflow_identity", stats.index, stats.mass,
                                    bar_delta * inflow / (1.0 - bar_delta * stats.stay)));
    checks.push_back(upper_check("band_outflow", stats.index, stats.mass * (1.0 - stats.stay),
                                 bar_delta * inflow, /*required=*/true));
    checks.push_back(upper_check("band_deviation", stats.index, stats.mass * stats.nondominant,
                                 bar_delta * constants.x_big * inflow, /*required=*/true));
    outflow_total += stats.mass * (1.0 - stats.stay);
  }

  const double two_k = std::exp2(report.max_band_index);
  checks.push_back(upper_check("outflow_total", -1, outflow_total,
                               two_k * (1.0 - bar_delta), /*required=*/true));
  checks.push_back(upper_check("base_band_deviation", 0, base.mass * base.nondominant,
                               constants.x_big * (1.0 - bar_delta), /*required=*/true));
  checks.push_back(upper_check("total_deviation", -1, report.average_nondominant,
                               two_k * constants.x_big * (1.0 - bar_delta),
                               /*required=*/true));
  InequalityCheck bound_check;
  bound_check.name = "total_deviation_bound";
  bound_check.band = -1;
  bound_check.lhs = report.average_nondominant;
  bound_check.rhs = report.bound.value;
  bound_check.required = true;
  bound_check.holds = report.bound.vacuous ||
                      std::log2(std::max(report.average_nondominant, 1e-300)) <=
                          report.bound.log2_value + 1e-12;
  checks.push_back(bound_check);
  checks.push_back(upper_check("downward_flow", -1, report.downward_flow, 0.0,
                               /*required=*/true));

  report.required_hold = true;
  for (const InequalityCheck& c : checks) {
    if (c.required && c.applicable) report.required_hold = report.required_hold && c.holds;
  }
  return report;
}

RationalityCertificate rationality_certificate(const RecordAutomaton& aut,
                                               const StrategyProfile& profile,
                                               const MonitoringStructure& mon,
                                               const StageGame& game,
                                               const std::vector<StateDistribution>& mu,
                                               double tol) {
  validate_game(game);
  validate_monitoring(mon, game);
  if (mu.size() != 2 || profile.roles.size() != 2) {
    throw DimensionMismatch("rationality certificate expects two roles");
  }
  RationalityCertificate cert;
  cert.min_role_nondominant = 1.0;
  cert.rational = true;
  for (int role = 0; role < 2; ++role) {
    const auto dominant = strictly_dominant_action(game, role);
    if (!dominant) throw NoDominantAction("role has no strictly dominant action");
    RoleCertificate rc;
    rc.average_payoff = average_payoff(mu[role], mu[1 - role], profile, game, role);
    rc.secure_payoff = secure_defection_payoff(aut, mu[1 - role], profile.roles[1 - role], game,
                                               role, *dominant);
    const std::vector<double> actions =
        average_action_distribution(mu[role], mu[1 - role], profile.roles[role]);
    rc.average_nondominant = 1.0 - actions[*dominant];
    rc.rational = rc.average_payoff >= rc.secure_payoff - tol;
    cert.min_role_nondominant = std::min(cert.min_role_nondominant, rc.average_nondominant);
    cert.rational = cert.rational && rc.rational;
    cert.roles.push_back(rc);
  }
  return cert;
}

}  // namespace erec::bounds
