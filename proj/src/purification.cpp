#include "erec/purification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "erec/errors.hpp"
#include "erec/game.hpp"
#include "erec/record.hpp"
#include "erec/value.hpp"

namespace erec::purification {

namespace {

constexpr int kCooperate = 0;
constexpr int kDefect = 1;

StrategyProfile profile_from(const std::vector<std::vector<double>>& choice,
                             const std::vector<std::vector<double>>& erase) {
  RoleStrategy s;
  s.action_rule.assign(2, std::vector<std::vector<double>>(2));
  for (int own = 0; own < 2; ++own) {
    for (int opp = 0; opp < 2; ++opp) {
      s.action_rule[own][opp] = {choice[own][opp], 1.0 - choice[own][opp]};
    }
  }
  s.erasure_rule = erase;
  StrategyProfile p;
  p.roles = {s, s};
  return p;
}

/** Runs the given jobs, concurrently when more than one hardware thread. */
template <typename Job>
std::vector<PerturbedEquilibrium> run_all(const std::vector<Job>& jobs) {
  std::vector<PerturbedEquilibrium> results(jobs.size());
  if (jobs.size() > 1 && std::thread::hardware_concurrency() > 1) {
    std::vector<std::future<PerturbedEquilibrium>> futures;
    futures.reserve(jobs.size());
    for (const auto& job : jobs) futures.push_back(std::async(std::launch::async, job));
    for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i]();
  }
  return results;
}

double fit_log_slope(const std::vector<double>& epsilons, const std::vector<double>& distances) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int n = static_cast<int>(epsilons.size());
  for (int i = 0; i < n; ++i) {
    const double x = std::log(epsilons[i]);
    const double y = std::log(std::max(distances[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

}  // namespace

double shock_difference_cdf(double w) {
  if (w <= -2.0) return 0.0;
  if (w >= 2.0) return 1.0;
  if (w <= 0.0) return (w + 2.0) * (w + 2.0) / 8.0;
  return 1.0 - (2.0 - w) * (2.0 - w) / 8.0;
}

PerturbedEquilibrium perturbed_fixed_point(double g, double l, double hat_delta, double bar_delta,
                                           double epsilon, double start_q, ShockFamily family,
                                           const PerturbOptions& options) {
  if (family != ShockFamily::UniformSymmetric) {
    throw ConfigInvalid("unsupported shock family");
  }
  if (epsilon <= 0.0) throw NonPositiveParameter("shock scale must be positive");
  if (start_q < 0.0 || start_q > 1.0) {
    throw NonPositiveParameter("start probability must lie in [0, 1]");
  }
  PopulationParams pop;
  pop.hat_delta = hat_delta;
  pop.bar_delta = bar_delta;
  validate_population(pop);
  const double delta = pop.delta();

  const StageGame game = make_prisoners_dilemma(g, l);
  const MonitoringStructure mon = perfect_monitoring(game);
  const RecordAutomaton aut = junior_senior_automaton();

  PerturbedEquilibrium out;
  out.epsilon = epsilon;
  out.start_q = start_q;
  out.choice_prob = {{start_q, 1.0}, {0.0, 0.0}};
  out.erase_prob = {{0.0, 0.0}, {0.0, 0.0}};

  FixedPointOptions mu_options;
  mu_options.tol = 1e-12;
  SolveOptions value_options;

  std::vector<StateDistribution> warm;
  double damping = options.damping;
  double previous_residual = std::numeric_limits<double>::infinity();

  for (out.iterations = 1; out.iterations <= options.max_iter; ++out.iterations) {
    const StrategyProfile prof = profile_from(out.choice_prob, out.erase_prob);
    const SelfConsistentResult steady = self_consistent_distribution(
        aut, prof, mon, game, bar_delta, mu_options, warm.empty() ? nullptr : &warm);
    warm = steady.mu;
    const ValueFunction value =
        policy_value(aut, prof, 0, steady.mu[1], mon, game, delta, value_options);

    std::vector<std::vector<double>> erase(2, std::vector<double>(2, 0.0));
    bool rule_changed = false;
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        erase[r][s] = value.v[aut.step[r][s]] < value.v[r] ? 1.0 : 0.0;
        rule_changed = rule_changed || erase[r][s] != out.erase_prob[r][s];
      }
    }

    const auto q_values = one_shot_values(aut, prof, 0, value.v, mon, game, delta);
    std::vector<std::vector<double>> target(2, std::vector<double>(2, 0.0));
    double residual = 0.0;
    for (int own = 0; own < 2; ++own) {
      for (int opp = 0; opp < 2; ++opp) {
        const double gap = q_values[own][opp][kDefect] - q_values[own][opp][kCooperate];
        target[own][opp] = 1.0 - shock_difference_cdf(gap / ((1.0 - delta) * epsilon));
        residual = std::max(residual, std::abs(target[own][opp] - out.choice_prob[own][opp]));
      }
    }

    out.mu = steady.mu[0];
    out.value = value.v;
    out.residual = residual;
    if (residual <= options.tol && !rule_changed) {
      out.converged = true;
      out.erase_prob = erase;
      return out;
    }

    if (residual >= previous_residual) {
      damping = std::max(damping * 0.5, options.damping_floor);
    }
    previous_residual = residual;
    out.erase_prob = erase;
    for (int own = 0; own < 2; ++own) {
      for (int opp = 0; opp < 2; ++opp) {
        out.choice_prob[own][opp] += damping * (target[own][opp] - out.choice_prob[own][opp]);
      }
    }
  }
  out.iterations = options.max_iter;
  return out;
}

PurificationReport purification_check(const junior_senior::Equilibrium& eq,
                                      const std::vector<double>& epsilons,
                                      const std::vector<double>& starts,
                                      const PerturbOptions& options) {
  if (epsilons.empty()) throw ConfigInvalid("epsilon list must be non-empty");
  if (starts.empty()) throw ConfigInvalid("start list must be non-empty");
  for (std::size_t i = 1; i < epsilons.size(); ++i) {
    if (epsilons[i] >= epsilons[i - 1]) {
      throw ConfigInvalid("epsilon list must be strictly decreasing");
    }
  }

  const std::vector<std::vector<double>> sigma = {{eq.q, 1.0}, {0.0, 0.0}};
  const std::vector<double> mu = {eq.mu0, eq.mu1};

  std::vector<std::function<PerturbedEquilibrium()>> jobs;
  for (const double epsilon : epsilons) {
    for (const double start : starts) {
      jobs.push_back([=, &eq] {
        return perturbed_fixed_point(eq.g, eq.l, eq.hat_delta, eq.bar_delta, epsilon, start,
                                     ShockFamily::UniformSymmetric, options);
      });
    }
  }
  const std::vector<PerturbedEquilibrium> runs = run_all(jobs);

  PurificationReport report;
  report.starts = starts;
  std::vector<double> distances;
  for (std::size_t level = 0; level < epsilons.size(); ++level) {
    EpsilonLevel entry;
    entry.epsilon = epsilons[level];
    for (std::size_t s = 0; s < starts.size(); ++s) {
      const PerturbedEquilibrium& run = runs[level * starts.size() + s];
      double d = 0.0;
      for (int own = 0; own < 2; ++own) {
        for (int opp = 0; opp < 2; ++opp) {
          d = std::max(d, std::abs(run.choice_prob[own][opp] - sigma[own][opp]));
        }
      }
      double mu_gap = 0.0;
      for (int r = 0; r < 2; ++r) mu_gap = std::max(mu_gap, std::abs(run.mu[r] - mu[r]));
      d += mu_gap;
      if (run.converged && (entry.best_run < 0 || d < entry.distance)) {
        entry.best_run = static_cast<int>(s);
        entry.distance = d;
      }
      entry.runs.push_back(run);
    }
    if (entry.best_run < 0) {
      throw NonConvergence("no perturbed fixed point converged at epsilon " +
                           std::to_string(entry.epsilon));
    }
    distances.push_back(entry.distance);
    report.levels.push_back(std::move(entry));
  }

  report.decreasing = true;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    report.decreasing = report.decreasing && distances[i] < distances[i - 1] + 1e-12;
  }
  if (distances.size() >= 2) {
    report.slope_defined = true;
    report.decay_slope = fit_log_slope(epsilons, distances);
  }
  report.pass = report.decreasing && distances.back() <= 10.0 * epsilons.back();
  return report;
}

CollapseCertificate supermodular_collapse_certificate(double g, double l, double hat_delta,
                                                      double bar_delta,
                                                      const std::vector<double>& epsilons,
                                                      const std::vector<double>& starts,
                                                      double collapse_threshold,
                                                      const PerturbOptions& options) {
  if (epsilons.empty()) throw ConfigInvalid("epsilon list must be non-empty");
  if (starts.empty()) throw ConfigInvalid("start list must be non-empty");

  CollapseCertificate cert;
  cert.max_margin = -std::numeric_limits<double>::infinity();
  for (int qi = 1; qi <= 19; ++qi) {
    const double q = qi / 20.0;
    for (int bi = 1; bi <= 19; ++bi) {
      const double bd = bi / 20.0;
      const double mu1 = 1.0 - junior_senior::mu0_of_q(q, bd);
      cert.max_margin = std::max(cert.max_margin, q * mu1 * (g - l));
    }
  }
  cert.margin_nonpositive = cert.max_margin <= 0.0;

  std::vector<std::function<PerturbedEquilibrium()>> jobs;
  for (const double start : starts) {
    for (const double epsilon : epsilons) {
      jobs.push_back([=] {
        return perturbed_fixed_point(g, l, hat_delta, bar_delta, epsilon, start,
                                     ShockFamily::UniformSymmetric, options);
      });
    }
  }
  const std::vector<PerturbedEquilibrium> runs = run_all(jobs);

  cert.final_cooperation = 0.0;
  bool all_decaying = true;
  bool all_converged = true;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    CollapseTrack track;
    track.start_q = starts[s];
    track.decaying = true;
    for (std::size_t level = 0; level < epsilons.size(); ++level) {
      const PerturbedEquilibrium& run = runs[s * epsilons.size() + level];
      all_converged = all_converged && run.converged;
      track.junior_junior.push_back(run.choice_prob[0][0]);
      if (level > 0) {
        // Converged cooperation levels are only resolved to the fixed-point
        // tolerance, so increases below that scale are solver noise, not
        // genuine non-monotonicity.
        const double slack = std::max(options.tol, 1e-12);
        track.decaying =
            track.decaying && track.junior_junior[level] <= track.junior_junior[level - 1] + slack;
      }
    }
    cert.final_cooperation = std::max(cert.final_cooperation, track.junior_junior.back());
    all_decaying = all_decaying && track.decaying;
    cert.tracks.push_back(std::move(track));
  }
  cert.collapsed = all_decaying && cert.final_cooperation <= collapse_threshold;
  cert.certified = cert.margin_nonpositive && all_converged && cert.collapsed;
  return cert;
}

}  // namespace erec::purification
