#include "erec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "erec/errors.hpp"

namespace erec::sim {

namespace {

enum Purpose : std::uint64_t {
  kMatch = 0,
  kAction = 1,
  kSignal = 2,
  kErase = 3,
  kDeath = 4,
};

/**
 * Counter-based generator: a 64-bit key (period, agent, purpose) is hashed
 * with two rounds of the splitmix64 finalizer. Each (key, seed) pair yields
 * one uniform double in [0, 1), independent of every other key, so skipped
 * draws never shift the stream.
 */
struct KeyedRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform(std::uint64_t period, std::uint64_t agent, std::uint64_t purpose) const {
    const std::uint64_t key = (period << 38) | (agent << 4) | purpose;
    const std::uint64_t h = mix(mix(seed ^ key));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }
};

/** Cumulative distribution with a fast path for deterministic cells. */
struct Sampler {
  bool deterministic = false;
  int fixed = 0;
  std::vector<double> cumulative;

  static Sampler from(const std::vector<double>& dist) {
    Sampler s;
    for (int i = 0; i < static_cast<int>(dist.size()); ++i) {
      if (dist[i] == 1.0) {
        s.deterministic = true;
        s.fixed = i;
        return s;
      }
    }
    s.cumulative.resize(dist.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      acc += dist[i];
      s.cumulative[i] = acc;
    }
    s.cumulative.back() = 1.0;
    return s;
  }

  int pick(double u) const {
    if (deterministic) return fixed;
    for (std::size_t i = 0; i + 1 < cumulative.size(); ++i) {
      if (u < cumulative[i]) return static_cast<int>(i);
    }
    return static_cast<int>(cumulative.size()) - 1;
  }

  bool needs_draw() const { return !deterministic; }
};

}  // namespace

SimResult run(const RecordAutomaton& aut, const StrategyProfile& profile,
              const MonitoringStructure& mon, const StageGame& game,
              const std::vector<PopulationParams>& populations, const SimConfig& config) {
  validate_automaton(aut);
  validate_game(game);
  validate_monitoring(mon, game);
  if (game.role_count() != 2 || profile.roles.size() != 2 || populations.size() != 2) {
    throw ConfigInvalid("simulation runs two matched populations");
  }
  for (const PopulationParams& pop : populations) validate_population(pop);
  const int states = aut.state_count();
  for (int role = 0; role < 2; ++role) {
    validate_strategy(profile.roles[role], aut, game.action_count(role), states);
    if (mon.signal_count(role) != aut.signal_count()) {
      throw StateSpaceMismatch("monitoring signals differ from the automaton alphabet");
    }
  }
  if (states > 256) throw ConfigInvalid("simulation records are stored as bytes");
  if (config.agents < 2) throw ConfigInvalid("need at least two agents per population");
  if (config.periods < 1) throw ConfigInvalid("need at least one period");
  if (config.burn_in < 0 || config.burn_in >= config.periods) {
    throw ConfigInvalid("burn-in must lie in [0, periods)");
  }
  if (static_cast<std::uint64_t>(config.agents) * 2 >= (1ULL << 34) ||
      static_cast<std::uint64_t>(config.periods) >= (1ULL << 26)) {
    throw ConfigInvalid("population or horizon exceeds the generator key space");
  }

  const int n = config.agents;
  const KeyedRng rng{config.seed};

  // Pre-baked samplers: actions per (role, own state, opponent state),
  // signals per (role, profile index), erasure probabilities as raw numbers.
  std::vector<std::vector<Sampler>> action(2, std::vector<Sampler>(states * states));
  for (int role = 0; role < 2; ++role) {
    for (int own = 0; own < states; ++own) {
      for (int opp = 0; opp < states; ++opp) {
        action[role][own * states + opp] = Sampler::from(profile.roles[role].action_rule[own][opp]);
      }
    }
  }
  std::vector<std::vector<Sampler>> signal(2);
  for (int role = 0; role < 2; ++role) {
    signal[role].reserve(game.profile_count());
    for (int p = 0; p < game.profile_count(); ++p) {
      signal[role].push_back(Sampler::from(mon.table[role][p]));
    }
  }

  std::vector<std::vector<std::uint8_t>> state(2, std::vector<std::uint8_t>(n, 0));
  for (int role = 0; role < 2; ++role) {
    std::fill(state[role].begin(), state[role].end(),
              static_cast<std::uint8_t>(aut.initial));
  }
  std::vector<int> perm(n);

  SimResult result;
  result.agents = n;
  result.measured_periods = config.periods - config.burn_in;
  result.mu.assign(2, StateDistribution(states, 0.0));
  result.action_freq.assign(2, std::vector<double>(game.action_count(0), 0.0));
  result.action_freq[1].assign(game.action_count(1), 0.0);
  result.mean_payoff.assign(2, 0.0);
  if (config.record_trace) result.trace.reserve(config.periods);

  std::vector<std::vector<long long>> action_count(
      2, std::vector<long long>(std::max(game.action_count(0), game.action_count(1)), 0));
  std::vector<double> payoff_sum(2, 0.0);

  for (int t = 0; t < config.periods; ++t) {
    PeriodStats stats;
    stats.period = t;
    stats.counts.assign(2, std::vector<int>(states, 0));
    stats.coop_freq.assign(2, 0.0);
    for (int role = 0; role < 2; ++role) {
      for (int a = 0; a < n; ++a) ++stats.counts[role][state[role][a]];
    }
    const bool measured = t >= config.burn_in;
    if (measured) {
      for (int role = 0; role < 2; ++role) {
        for (int s = 0; s < states; ++s) {
          result.mu[role][s] += static_cast<double>(stats.counts[role][s]);
        }
      }
    }

    // Uniform random bijection between the populations.
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i + 1 < n; ++i) {
      const double u = rng.uniform(t, i, kMatch);
      const int j = i + static_cast<int>(u * (n - i));
      std::swap(perm[i], perm[std::min(j, n - 1)]);
    }

    std::vector<long long> coop(2, 0);
    std::vector<double> flow(2, 0.0);
    for (int i = 0; i < n; ++i) {
      const int a0_id = i;
      const int a1_id = n + perm[i];
      const int s0 = state[0][i];
      const int s1 = state[1][perm[i]];

      const Sampler& d0 = action[0][s0 * states + s1];
      const Sampler& d1 = action[1][s1 * states + s0];
      const int act0 = d0.pick(d0.needs_draw() ? rng.uniform(t, a0_id, kAction) : 0.0);
      const int act1 = d1.pick(d1.needs_draw() ? rng.uniform(t, a1_id, kAction) : 0.0);
      ++action_count[0][act0];
      ++action_count[1][act1];
      if (act0 == 0) ++coop[0];
      if (act1 == 0) ++coop[1];
      const int pidx = game.profile_index({act0, act1});
      flow[0] += game.payoffs[0][pidx];
      flow[1] += game.payoffs[1][pidx];

      const Sampler& f0 = signal[0][pidx];
      const Sampler& f1 = signal[1][pidx];
      const int sig0 = f0.pick(f0.needs_draw() ? rng.uniform(t, a0_id, kSignal) : 0.0);
      const int sig1 = f1.pick(f1.needs_draw() ? rng.uniform(t, a1_id, kSignal) : 0.0);

      const double e0 = profile.roles[0].erasure_rule[s0][sig0];
      if (!(e0 == 1.0) && (e0 == 0.0 || rng.uniform(t, a0_id, kErase) >= e0)) {
        state[0][i] = static_cast<std::uint8_t>(aut.step[s0][sig0]);
      }
      const double e1 = profile.roles[1].erasure_rule[s1][sig1];
      if (!(e1 == 1.0) && (e1 == 0.0 || rng.uniform(t, a1_id, kErase) >= e1)) {
        state[1][perm[i]] = static_cast<std::uint8_t>(aut.step[s1][sig1]);
      }
    }

    for (int role = 0; role < 2; ++role) {
      stats.coop_freq[role] = static_cast<double>(coop[role]) / n;
      if (measured) payoff_sum[role] += flow[role] / n;
    }
    if (!measured) {
      for (int role = 0; role < 2; ++role) {
        for (int a = 0; a < game.action_count(role); ++a) action_count[role][a] = 0;
      }
    }
    if (config.record_trace) result.trace.push_back(std::move(stats));

    // Deaths resolve after play and before the next matching.
    for (int role = 0; role < 2; ++role) {
      const double death_prob = 1.0 - populations[role].bar_delta;
      for (int a = 0; a < n; ++a) {
        if (rng.uniform(t, role * n + a, kDeath) < death_prob) {
          state[role][a] = static_cast<std::uint8_t>(aut.initial);
          ++result.deaths;
          ++result.births;
        }
      }
    }
  }

  const double denom = static_cast<double>(result.measured_periods) * n;
  for (int role = 0; role < 2; ++role) {
    for (int s = 0; s < states; ++s) result.mu[role][s] /= denom;
    for (int a = 0; a < game.action_count(role); ++a) {
      result.action_freq[role][a] = static_cast<double>(action_count[role][a]) / denom;
    }
    result.mean_payoff[role] = payoff_sum[role] / result.measured_periods;
  }
  return result;
}

Comparison compare(const SimResult& result, const std::vector<StateDistribution>& analytic,
                   double tolerance) {
  if (analytic.size() != result.mu.size()) {
    throw StateSpaceMismatch("role counts differ between simulation and analytic input");
  }
  Comparison cmp;
  cmp.states.resize(result.mu.size());
  for (std::size_t role = 0; role < result.mu.size(); ++role) {
    if (analytic[role].size() != result.mu[role].size()) {
      throw StateSpaceMismatch("state counts differ between simulation and analytic input");
    }
    for (std::size_t s = 0; s < result.mu[role].size(); ++s) {
      StateComparison row;
      row.empirical = result.mu[role][s];
      row.analytic = analytic[role][s];
      row.deviation = std::abs(row.empirical - row.analytic);
      const double se = std::sqrt(row.analytic * (1.0 - row.analytic) / result.agents);
      if (se > 0.0) {
        row.z = (row.empirical - row.analytic) / se;
      } else {
        row.z = row.deviation == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      }
      cmp.max_deviation = std::max(cmp.max_deviation, row.deviation);
      cmp.states[role].push_back(row);
    }
  }
  cmp.pass = cmp.max_deviation <= tolerance;
  return cmp;
}

}  // namespace erec::sim
