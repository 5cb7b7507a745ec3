#pragma once

#include <optional>
#include <string>
#include <vector>

namespace erec {

/**
 * Normal-form stage game with dense per-role payoff tensors.
 *
 * A profile is one action index per role; tensors are laid out with the last
 * role's action varying fastest. Payoffs are validated for shape, not sign.
 */
struct StageGame {
  /// actions[role] lists the role's action labels.
  std::vector<std::vector<std::string>> actions;
  /// payoffs[role][profile_index(a)] is the role's payoff at profile a.
  std::vector<std::vector<double>> payoffs;

  int role_count() const { return static_cast<int>(actions.size()); }
  int action_count(int role) const { return static_cast<int>(actions[role].size()); }
  int profile_count() const;
  int profile_index(const std::vector<int>& profile) const;
  std::vector<int> profile_actions(int index) const;
  double payoff(int role, const std::vector<int>& profile) const;
  /// Two-role convenience: a0 is role 0's action, a1 is role 1's.
  double payoff2(int role, int a0, int a1) const;
  /// Index of the label within the role's action list, or -1.
  int action_index(int role, const std::string& label) const;
};

/** Throws if shapes are inconsistent or the game has fewer than two roles. */
void validate_game(const StageGame& game);

enum class Modularity { Submodular, Supermodular };

/**
 * Two-action symmetric dilemma: mutual cooperation pays 1, mutual defection 0,
 * defecting against a cooperator pays 1+g, cooperating against a defector -l.
 * Submodular means the defection gain is larger against a cooperator (g > l).
 */
struct PrisonersDilemmaParams {
  double g = 0.0;
  double l = 0.0;
  Modularity modularity = Modularity::Submodular;
};

/** Builds the parameter record; throws NonPositiveParameter unless g, l > 0. */
PrisonersDilemmaParams pd_params(double g, double l);

/** Two-role stage game for the dilemma, actions labelled C and D. */
StageGame make_prisoners_dilemma(double g, double l);

/**
 * Demographics of one population: hat_delta discounts time, bar_delta is the
 * per-period survival probability. The effective discount factor multiplies
 * the two; expected lifespan is 1/(1 - bar_delta) periods.
 */
struct PopulationParams {
  double hat_delta = 0.0;
  double bar_delta = 0.0;

  double delta() const { return hat_delta * bar_delta; }
  double expected_lifespan() const { return 1.0 / (1.0 - bar_delta); }
};

/** Throws NonPositiveParameter unless both parameters lie in (0, 1). */
void validate_population(const PopulationParams& pop);

/**
 * Per-role private signal structure. table[role][profile_index] is a
 * distribution over the role's own signals given the full action profile.
 */
struct MonitoringStructure {
  std::vector<std::vector<std::string>> signals;
  std::vector<std::vector<std::vector<double>>> table;

  int signal_count(int role) const { return static_cast<int>(signals[role].size()); }
};

/**
 * Validates shapes against the game, that every row is a probability
 * distribution (sum within 1e-12, entries in [0,1]), and that every signal is
 * achievable under at least one profile.
 */
void validate_monitoring(const MonitoringStructure& mon, const StageGame& game);

/** Each role observes its own action exactly: signals mirror actions. */
MonitoringStructure perfect_monitoring(const StageGame& game);

/**
 * The action that is strictly better than every other own action against
 * every opponent profile, if one exists.
 */
std::optional<int> strictly_dominant_action(const StageGame& game, int role);

struct SupportCheck {
  /// True iff positivity of f(s | a_role, a_others) never depends on a_others.
  bool holds = false;
  /// min over signals of max over own actions of min over opponent profiles
  /// of the signal probability; strictly positive whenever holds is true and
  /// every signal is achievable.
  double eta = 0.0;
};

SupportCheck non_shifting_support(const MonitoringStructure& mon, const StageGame& game, int role);

}  // namespace erec
