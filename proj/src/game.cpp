#include "erec/game.hpp"

#include <cmath>
#include <limits>

#include "erec/errors.hpp"

namespace erec {

int StageGame::profile_count() const {
  int n = 1;
  for (int r = 0; r < role_count(); ++r) n *= action_count(r);
  return n;
}

int StageGame::profile_index(const std::vector<int>& profile) const {
  if (static_cast<int>(profile.size()) != role_count())
    throw DimensionMismatch("profile length does not match role count");
  int idx = 0;
  for (int r = 0; r < role_count(); ++r) {
    if (profile[r] < 0 || profile[r] >= action_count(r))
      throw DimensionMismatch("action index out of range in profile");
    idx = idx * action_count(r) + profile[r];
  }
  return idx;
}

std::vector<int> StageGame::profile_actions(int index) const {
  std::vector<int> profile(role_count());
  for (int r = role_count() - 1; r >= 0; --r) {
    profile[r] = index % action_count(r);
    index /= action_count(r);
  }
  return profile;
}

double StageGame::payoff(int role, const std::vector<int>& profile) const {
  return payoffs[role][profile_index(profile)];
}

double StageGame::payoff2(int role, int a0, int a1) const {
  return payoffs[role][a0 * action_count(1) + a1];
}

int StageGame::action_index(int role, const std::string& label) const {
  for (int a = 0; a < action_count(role); ++a)
    if (actions[role][a] == label) return a;
  return -1;
}

void validate_game(const StageGame& game) {
  if (game.role_count() < 2) throw DimensionMismatch("stage game needs at least two roles");
  if (static_cast<int>(game.payoffs.size()) != game.role_count())
    throw DimensionMismatch("one payoff tensor per role required");
  for (int r = 0; r < game.role_count(); ++r) {
    if (game.action_count(r) < 1) throw DimensionMismatch("each role needs at least one action");
    if (static_cast<int>(game.payoffs[r].size()) != game.profile_count())
      throw DimensionMismatch("payoff tensor size does not match profile count");
    for (double u : game.payoffs[r])
      if (!std::isfinite(u)) throw NonPositiveParameter("payoffs must be finite");
  }
}

PrisonersDilemmaParams pd_params(double g, double l) {
  if (!(g > 0.0) || !(l > 0.0))
    throw NonPositiveParameter("dilemma parameters g and l must be strictly positive");
  PrisonersDilemmaParams pd;
  pd.g = g;
  pd.l = l;
  pd.modularity = g > l ? Modularity::Submodular : Modularity::Supermodular;
  return pd;
}

StageGame make_prisoners_dilemma(double g, double l) {
  pd_params(g, l);
  StageGame game;
  game.actions = {{"C", "D"}, {"C", "D"}};
  // Row player's payoffs at (C,C), (C,D), (D,C), (D,D); column player mirrored.
  game.payoffs = {
      {1.0, -l, 1.0 + g, 0.0},
      {1.0, 1.0 + g, -l, 0.0},
  };
  validate_game(game);
  return game;
}

void validate_population(const PopulationParams& pop) {
  if (!(pop.hat_delta > 0.0) || !(pop.hat_delta < 1.0))
    throw NonPositiveParameter("hat_delta must lie in (0, 1)");
  if (!(pop.bar_delta > 0.0) || !(pop.bar_delta < 1.0))
    throw NonPositiveParameter("bar_delta must lie in (0, 1)");
}

void validate_monitoring(const MonitoringStructure& mon, const StageGame& game) {
  if (static_cast<int>(mon.signals.size()) != game.role_count() ||
      static_cast<int>(mon.table.size()) != game.role_count())
    throw DimensionMismatch("monitoring needs one signal set and one table per role");
  const int profiles = game.profile_count();
  for (int r = 0; r < game.role_count(); ++r) {
    const int s_count = mon.signal_count(r);
    if (s_count < 1) throw DimensionMismatch("each role needs at least one signal");
    if (static_cast<int>(mon.table[r].size()) != profiles)
      throw DimensionMismatch("monitoring table rows must cover every action profile");
    std::vector<double> achievable(s_count, 0.0);
    for (int p = 0; p < profiles; ++p) {
      if (static_cast<int>(mon.table[r][p].size()) != s_count)
        throw DimensionMismatch("monitoring row length must equal the signal count");
      double sum = 0.0;
      for (int s = 0; s < s_count; ++s) {
        const double f = mon.table[r][p][s];
        if (!(f >= 0.0) || !(f <= 1.0))
          throw NonPositiveParameter("signal probabilities must lie in [0, 1]");
        sum += f;
        achievable[s] = std::max(achievable[s], f);
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw NonPositiveParameter("signal distributions must sum to 1 within 1e-12");
    }
    for (int s = 0; s < s_count; ++s)
      if (achievable[s] <= 0.0)
        throw NonPositiveParameter("every signal must be achievable under some profile");
  }
}

MonitoringStructure perfect_monitoring(const StageGame& game) {
  validate_game(game);
  MonitoringStructure mon;
  mon.signals = game.actions;
  mon.table.resize(game.role_count());
  const int profiles = game.profile_count();
  for (int r = 0; r < game.role_count(); ++r) {
    mon.table[r].assign(profiles, std::vector<double>(game.action_count(r), 0.0));
    for (int p = 0; p < profiles; ++p) {
      const std::vector<int> a = game.profile_actions(p);
      mon.table[r][p][a[r]] = 1.0;
    }
  }
  return mon;
}

namespace {

/// Enumerates profile indices with the role's own action pinned to a.
std::vector<int> profiles_with_action(const StageGame& game, int role, int a) {
  std::vector<int> out;
  const int profiles = game.profile_count();
  for (int p = 0; p < profiles; ++p)
    if (game.profile_actions(p)[role] == a) out.push_back(p);
  return out;
}

}  // namespace

std::optional<int> strictly_dominant_action(const StageGame& game, int role) {
  validate_game(game);
  const int n = game.action_count(role);
  for (int star = 0; star < n; ++star) {
    bool dominant = true;
    for (int a = 0; a < n && dominant; ++a) {
      if (a == star) continue;
      // Compare payoffs profile-by-profile with the opponents' actions fixed.
      const std::vector<int> star_profiles = profiles_with_action(game, role, star);
      for (int p_star : star_profiles) {
        std::vector<int> profile = game.profile_actions(p_star);
        profile[role] = a;
        if (!(game.payoffs[role][p_star] > game.payoff(role, profile))) {
          dominant = false;
          break;
        }
      }
    }
    if (dominant) return star;
  }
  return std::nullopt;
}

SupportCheck non_shifting_support(const MonitoringStructure& mon, const StageGame& game, int role) {
  validate_monitoring(mon, game);
  SupportCheck check;
  check.holds = true;
  const int s_count = mon.signal_count(role);
  double eta = std::numeric_limits<double>::infinity();
  for (int s = 0; s < s_count; ++s) {
    double best_guaranteed = 0.0;
    for (int a = 0; a < game.action_count(role); ++a) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (int p : profiles_with_action(game, role, a)) {
        const double f = mon.table[role][p][s];
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
      if (hi > 0.0 && lo <= 0.0) check.holds = false;
      best_guaranteed = std::max(best_guaranteed, lo);
    }
    eta = std::min(eta, best_guaranteed);
  }
  check.eta = eta;
  return check;
}

}  // namespace erec
