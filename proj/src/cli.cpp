#include "erec/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "erec/bounds.hpp"
#include "erec/errors.hpp"
#include "erec/io.hpp"
#include "erec/junior_senior.hpp"
#include "erec/purification.hpp"
#include "erec/sim.hpp"
#include "erec/value.hpp"

namespace erec::cli {
namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string dbl(double x) { return io::format_double(x); }

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigInvalid(path + ": " + message);
}

void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "expected an object");
}

void check_keys(const json& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  require_object(node, path);
  for (const auto& item : node.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigInvalid("unknown key '" + item.key() + "' at " + path);
  }
}

const json& member(const json& node, const std::string& path, const char* key) {
  const auto it = node.find(key);
  if (it == node.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

double get_double(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

long long get_integer(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<long long>();
}

bool get_bool(const json& node, const std::string& path) {
  if (!node.is_boolean()) fail(path, "expected a boolean");
  return node.get<bool>();
}

std::string get_string(const json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "expected a string");
  return node.get<std::string>();
}

std::vector<double> get_double_list(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array of numbers");
  std::vector<double> values;
  values.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    values.push_back(get_double(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return values;
}

std::vector<std::vector<double>> get_matrix(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array");
  std::vector<std::vector<double>> rows;
  rows.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    rows.push_back(get_double_list(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return rows;
}

std::vector<std::vector<std::vector<double>>> get_tensor(const json& node,
                                                         const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array");
  std::vector<std::vector<std::vector<double>>> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(get_matrix(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

struct ParsedGame {
  StageGame game;
  std::optional<PrisonersDilemmaParams> pd;
};

ParsedGame parse_game(const json& node, const std::string& path) {
  require_object(node, path);
  ParsedGame out;
  if (node.contains("pd")) {
    check_keys(node, path, {"pd"});
    const json& pd = member(node, path, "pd");
    check_keys(pd, path + ".pd", {"g", "l"});
    const double g = get_double(member(pd, path + ".pd", "g"), path + ".pd.g");
    const double l = get_double(member(pd, path + ".pd", "l"), path + ".pd.l");
    out.pd = pd_params(g, l);
    out.game = make_prisoners_dilemma(g, l);
    return out;
  }
  check_keys(node, path, {"actions", "payoffs"});
  const json& actions = member(node, path, "actions");
  if (!actions.is_array() || actions.empty()) fail(path + ".actions", "expected an array");
  for (std::size_t r = 0; r < actions.size(); ++r) {
    const std::string role_path = path + ".actions[" + std::to_string(r) + "]";
    const json& labels = actions[r];
    if (!labels.is_array() || labels.empty()) fail(role_path, "expected an array of labels");
    std::vector<std::string> role_labels;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      role_labels.push_back(get_string(labels[a], role_path + "[" + std::to_string(a) + "]"));
    }
    out.game.actions.push_back(std::move(role_labels));
  }
  out.game.payoffs = get_matrix(member(node, path, "payoffs"), path + ".payoffs");
  validate_game(out.game);
  return out;
}

MonitoringStructure parse_monitoring(const json& node, const std::string& path,
                                     const StageGame& game) {
  if (node.is_string()) {
    if (node.get<std::string>() == "perfect") return perfect_monitoring(game);
    fail(path, "expected \"perfect\" or an object with signals and table");
  }
  check_keys(node, path, {"signals", "table"});
  MonitoringStructure mon;
  const json& signals = member(node, path, "signals");
  if (!signals.is_array() || signals.empty()) fail(path + ".signals", "expected an array");
  for (std::size_t r = 0; r < signals.size(); ++r) {
    const std::string role_path = path + ".signals[" + std::to_string(r) + "]";
    const json& labels = signals[r];
    if (!labels.is_array() || labels.empty()) fail(role_path, "expected an array of labels");
    std::vector<std::string> role_labels;
    for (std::size_t s = 0; s < labels.size(); ++s) {
      role_labels.push_back(get_string(labels[s], role_path + "[" + std::to_string(s) + "]"));
    }
    mon.signals.push_back(std::move(role_labels));
  }
  mon.table = get_tensor(member(node, path, "table"), path + ".table");
  validate_monitoring(mon, game);
  return mon;
}

RecordAutomaton parse_automaton(const json& node, const std::string& path) {
  if (node.is_string()) {
    if (node.get<std::string>() == "junior_senior") return junior_senior_automaton();
    fail(path, "expected \"junior_senior\" or an object with states, initial, step");
  }
  check_keys(node, path, {"states", "initial", "step"});
  RecordAutomaton aut = automaton_from_json(node.dump());
  validate_automaton(aut);
  return aut;
}

std::vector<PopulationParams> parse_populations(const json& node, const std::string& path) {
  const auto parse_one = [](const json& obj, const std::string& p) {
    check_keys(obj, p, {"hat_delta", "bar_delta"});
    PopulationParams pop;
    pop.hat_delta = get_double(member(obj, p, "hat_delta"), p + ".hat_delta");
    pop.bar_delta = get_double(member(obj, p, "bar_delta"), p + ".bar_delta");
    validate_population(pop);
    return pop;
  };
  if (node.is_array()) {
    if (node.size() != 2) fail(path, "expected exactly two populations");
    return {parse_one(node[0], path + "[0]"), parse_one(node[1], path + "[1]")};
  }
  const PopulationParams pop = parse_one(node, path);
  return {pop, pop};
}

void parse_strategy(const json& node, const std::string& path, RunConfig& cfg) {
  if (node.is_string()) {
    if (node.get<std::string>() == "solved") {
      cfg.strategy_source = StrategySource::Solved;
      return;
    }
    fail(path, "expected \"solved\" or an object");
  }
  require_object(node, path);
  if (node.contains("junior_senior")) {
    check_keys(node, path, {"junior_senior"});
    const json& inner = member(node, path, "junior_senior");
    check_keys(inner, path + ".junior_senior", {"q"});
    const double q = get_double(member(inner, path + ".junior_senior", "q"),
                                path + ".junior_senior.q");
    if (!(q >= 0.0 && q <= 1.0)) fail(path + ".junior_senior.q", "expected a value in [0, 1]");
    cfg.strategy_source = StrategySource::JuniorSenior;
    cfg.strategy_q = q;
    return;
  }
  check_keys(node, path, {"roles"});
  const json& roles = member(node, path, "roles");
  if (!roles.is_array() || roles.size() != 2) fail(path + ".roles", "expected two role entries");
  StrategyProfile profile;
  for (std::size_t r = 0; r < 2; ++r) {
    const std::string role_path = path + ".roles[" + std::to_string(r) + "]";
    check_keys(roles[r], role_path, {"action_rule", "erasure_rule"});
    RoleStrategy role;
    role.action_rule = get_tensor(member(roles[r], role_path, "action_rule"),
                                  role_path + ".action_rule");
    role.erasure_rule = get_matrix(member(roles[r], role_path, "erasure_rule"),
                                   role_path + ".erasure_rule");
    profile.roles.push_back(std::move(role));
  }
  for (int r = 0; r < 2; ++r) {
    validate_strategy(profile.roles[static_cast<std::size_t>(r)], cfg.automaton,
                      cfg.game.action_count(r), cfg.automaton.state_count());
  }
  cfg.explicit_strategy = std::move(profile);
  cfg.strategy_source = StrategySource::Explicit;
}

bool is_junior_senior_shape(const RecordAutomaton& aut) {
  const RecordAutomaton reference = junior_senior_automaton();
  return aut.initial == reference.initial && aut.step == reference.step;
}

bool command_takes_population(Command c) {
  return c != Command::Scan && c != Command::Sweep;
}

bool command_takes_strategy(Command c) {
  return c == Command::Verify || c == Command::Bounds || c == Command::Simulate;
}

bool command_requires_pd(Command c) {
  return c == Command::Solve || c == Command::Scan || c == Command::Purify;
}

const char* command_block_name(Command c) {
  switch (c) {
    case Command::Scan:
      return "scan";
    case Command::Bounds:
      return "bounds";
    case Command::Purify:
      return "purify";
    case Command::Simulate:
      return "sim";
    case Command::Sweep:
      return "sweep";
    default:
      return nullptr;
  }
}

void parse_scan_block(const json& node, RunConfig& cfg) {
  check_keys(node, "$.scan", {"hat_deltas", "resolution"});
  cfg.scan_hat_deltas = get_double_list(member(node, "$.scan", "hat_deltas"),
                                        "$.scan.hat_deltas");
  for (double hat : cfg.scan_hat_deltas) {
    if (!(hat > 0.0 && hat < 1.0)) fail("$.scan.hat_deltas", "entries must lie in (0, 1)");
  }
  std::sort(cfg.scan_hat_deltas.begin(), cfg.scan_hat_deltas.end());
  if (node.contains("resolution")) {
    cfg.scan_resolution = get_double(node.at("resolution"), "$.scan.resolution");
    if (!(cfg.scan_resolution > 0.0 && cfg.scan_resolution <= 0.1)) {
      fail("$.scan.resolution", "expected a value in (0, 0.1]");
    }
  }
}

void parse_bounds_block(const json& node, RunConfig& cfg) {
  check_keys(node, "$.bounds", {"role", "target"});
  if (node.contains("role")) {
    const long long role = get_integer(node.at("role"), "$.bounds.role");
    if (role != 0 && role != 1) fail("$.bounds.role", "expected 0 or 1");
    cfg.bounds_role = static_cast<int>(role);
  }
  if (node.contains("target")) {
    cfg.bound_target = get_double(node.at("target"), "$.bounds.target");
    if (!(cfg.bound_target > 0.0 && cfg.bound_target <= 1.0)) {
      fail("$.bounds.target", "expected a value in (0, 1]");
    }
  }
}

void parse_purify_block(const json& node, RunConfig& cfg) {
  check_keys(node, "$.purify", {"epsilons", "starts", "collapse_threshold"});
  cfg.purify_epsilons = get_double_list(member(node, "$.purify", "epsilons"),
                                        "$.purify.epsilons");
  for (std::size_t i = 0; i < cfg.purify_epsilons.size(); ++i) {
    if (!(cfg.purify_epsilons[i] > 0.0)) fail("$.purify.epsilons", "entries must be positive");
    if (i > 0 && !(cfg.purify_epsilons[i] < cfg.purify_epsilons[i - 1])) {
      fail("$.purify.epsilons", "entries must be strictly decreasing");
    }
  }
  if (node.contains("starts")) {
    cfg.purify_starts = get_double_list(node.at("starts"), "$.purify.starts");
    for (double s : cfg.purify_starts) {
      if (!(s >= 0.0 && s <= 1.0)) fail("$.purify.starts", "entries must lie in [0, 1]");
    }
  }
  if (node.contains("collapse_threshold")) {
    cfg.collapse_threshold = get_double(node.at("collapse_threshold"),
                                        "$.purify.collapse_threshold");
    if (!(cfg.collapse_threshold > 0.0 && cfg.collapse_threshold < 1.0)) {
      fail("$.purify.collapse_threshold", "expected a value in (0, 1)");
    }
  }
}

void parse_sim_block(const json& node, RunConfig& cfg) {
  check_keys(node, "$.sim",
             {"agents", "periods", "burn_in", "record_trace", "compare_tolerance"});
  if (node.contains("agents")) {
    const long long agents = get_integer(node.at("agents"), "$.sim.agents");
    if (agents < 2 || agents > 1000000000LL) fail("$.sim.agents", "expected 2..1e9");
    cfg.sim_agents = agents;
  }
  if (node.contains("periods")) {
    const long long periods = get_integer(node.at("periods"), "$.sim.periods");
    if (periods < 1 || periods > 60000000LL) fail("$.sim.periods", "expected 1..6e7");
    cfg.sim_periods = periods;
  }
  if (node.contains("burn_in")) {
    const long long burn = get_integer(node.at("burn_in"), "$.sim.burn_in");
    if (burn < 0 || burn >= cfg.sim_periods) {
      fail("$.sim.burn_in", "expected a value in [0, periods)");
    }
    cfg.sim_burn_in = burn;
  }
  if (node.contains("record_trace")) {
    cfg.sim_record_trace = get_bool(node.at("record_trace"), "$.sim.record_trace");
  }
  if (node.contains("compare_tolerance")) {
    cfg.sim_compare_tolerance = get_double(node.at("compare_tolerance"),
                                           "$.sim.compare_tolerance");
    if (!(cfg.sim_compare_tolerance > 0.0)) {
      fail("$.sim.compare_tolerance", "expected a positive value");
    }
  }
}

void parse_sweep_block(const json& node, RunConfig& cfg) {
  check_keys(node, "$.sweep", {"g", "l", "hat_delta", "bar_delta"});
  cfg.sweep_g = get_double_list(member(node, "$.sweep", "g"), "$.sweep.g");
  cfg.sweep_l = get_double_list(member(node, "$.sweep", "l"), "$.sweep.l");
  cfg.sweep_hat_delta = get_double_list(member(node, "$.sweep", "hat_delta"),
                                        "$.sweep.hat_delta");
  cfg.sweep_bar_delta = get_double_list(member(node, "$.sweep", "bar_delta"),
                                        "$.sweep.bar_delta");
  for (double g : cfg.sweep_g) {
    if (!(g > 0.0)) fail("$.sweep.g", "entries must be positive");
  }
  for (double l : cfg.sweep_l) {
    if (!(l > 0.0)) fail("$.sweep.l", "entries must be positive");
  }
  for (double d : cfg.sweep_hat_delta) {
    if (!(d > 0.0 && d < 1.0)) fail("$.sweep.hat_delta", "entries must lie in (0, 1)");
  }
  for (double d : cfg.sweep_bar_delta) {
    if (!(d > 0.0 && d < 1.0)) fail("$.sweep.bar_delta", "entries must lie in (0, 1)");
  }
  const auto sort_axis = [](std::vector<double>& axis) {
    std::sort(axis.begin(), axis.end());
  };
  sort_axis(cfg.sweep_g);
  sort_axis(cfg.sweep_l);
  sort_axis(cfg.sweep_hat_delta);
  sort_axis(cfg.sweep_bar_delta);
}

// ---------------------------------------------------------------------------
// Artifact helpers
// ---------------------------------------------------------------------------

ojson existence_json(const junior_senior::ExistenceCondition& cond) {
  return ojson{{"lhs_written", cond.lhs_written},
               {"lhs_binding", cond.lhs_binding},
               {"rhs", cond.rhs},
               {"holds_written", cond.holds_written},
               {"holds_binding", cond.holds_binding}};
}

ojson params_json(const RunConfig& cfg) {
  ojson out;
  if (cfg.pd) {
    out["g"] = cfg.pd->g;
    out["l"] = cfg.pd->l;
  }
  if (!cfg.populations.empty()) {
    out["hat_delta"] = cfg.populations[0].hat_delta;
    out["bar_delta"] = cfg.populations[0].bar_delta;
    out["delta"] = cfg.populations[0].delta();
    out["expected_lifespan"] = cfg.populations[0].expected_lifespan();
  }
  return out;
}

void write_json(const fs::path& path, const ojson& doc) {
  io::write_file(path, doc.dump(2) + "\n");
}

/** Records a provably-missing cooperative equilibrium and returns exit 2. */
int write_infeasible(const RunConfig& cfg, const char* filename) {
  const auto& pd = *cfg.pd;
  const auto& pop = cfg.populations[0];
  const auto cond = junior_senior::existence_condition(pd.g, pd.l, pop.hat_delta, pop.bar_delta);
  ojson doc;
  doc["feasible"] = false;
  doc["params"] = params_json(cfg);
  doc["existence"] = existence_json(cond);
  doc["reason"] =
      "the existence inequality fails: lhs_binding < rhs, so the mixing equation has no root";
  write_json(fs::path(cfg.out_dir) / filename, doc);
  return 2;
}

struct ResolvedStrategy {
  StrategyProfile profile;
  std::optional<junior_senior::Equilibrium> equilibrium;
};

/**
 * Materializes the profile; empty means the solved strategy was requested
 * and provably does not exist (the caller should emit the infeasible
 * artifact and exit 2).
 */
std::optional<ResolvedStrategy> resolve_strategy(const RunConfig& cfg) {
  ResolvedStrategy out;
  switch (cfg.strategy_source) {
    case StrategySource::Solved: {
      const auto& pd = *cfg.pd;
      const auto& pop = cfg.populations[0];
      auto eq = junior_senior::solve(pd.g, pd.l, pop.hat_delta, pop.bar_delta);
      if (!eq) return std::nullopt;
      out.profile = junior_senior::profile(eq->q);
      out.equilibrium = std::move(eq);
      return out;
    }
    case StrategySource::JuniorSenior:
      out.profile = junior_senior::profile(cfg.strategy_q);
      return out;
    case StrategySource::Explicit:
      out.profile = cfg.explicit_strategy;
      return out;
  }
  throw Error("unreachable strategy source");
}

std::string cell_label(const RecordAutomaton& aut, int own, int opp) {
  return aut.states[static_cast<std::size_t>(own)] + "|" +
         aut.states[static_cast<std::size_t>(opp)];
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int run_solve(const RunConfig& cfg) {
  const auto& pd = *cfg.pd;
  const auto& pop = cfg.populations[0];
  const double delta = pop.delta();
  const auto cond = junior_senior::existence_condition(pd.g, pd.l, pop.hat_delta, pop.bar_delta);
  const auto eq = junior_senior::solve(pd.g, pd.l, pop.hat_delta, pop.bar_delta);

  ojson doc;
  doc["feasible"] = eq.has_value();
  doc["params"] = params_json(cfg);
  doc["existence"] = existence_json(cond);
  if (!eq) {
    doc["reason"] =
        "the existence inequality fails: lhs_binding < rhs, so the mixing equation has no root";
    write_json(fs::path(cfg.out_dir) / "equilibrium.json", doc);
    return 2;
  }

  doc["equilibrium"] = ojson{{"q", eq->q},
                             {"mu0", eq->mu0},
                             {"mu1", eq->mu1},
                             {"v0", eq->v0},
                             {"v1", eq->v1},
                             {"degenerate", eq->degenerate},
                             {"average_cooperation", junior_senior::average_cooperation(*eq)},
                             {"average_payoff", junior_senior::average_payoff_analytic(*eq)}};
  doc["margins"] = ojson{{"indifference", eq->margin_indifference},
                         {"junior_vs_senior", eq->margin_junior_vs_senior},
                         {"senior_vs_c", eq->margin_senior_vs_c},
                         {"senior_vs_d", eq->margin_senior_vs_d},
                         {"always_defect", eq->margin_always_defect}};

  const double one_minus = 1.0 - delta;
  const double steady_residual =
      eq->mu0 - ((1.0 - pop.bar_delta) + pop.bar_delta * eq->mu0 * eq->mu0 * (1.0 - eq->q));
  const double value_gap_residual =
      (eq->v1 - eq->v0) - one_minus / delta * (eq->q * pd.g + (1.0 - eq->q) * pd.l);
  const double junior_closed_residual =
      eq->v0 - eq->q * (eq->mu0 + pd.g - eq->mu1 * pd.l);
  const double senior_value_residual = eq->v1 - eq->mu0 * (1.0 + pd.g);
  doc["residuals"] = ojson{{"steady_state", steady_residual},
                           {"value_gap", value_gap_residual},
                           {"junior_value_closed_form", junior_closed_residual},
                           {"senior_value", senior_value_residual},
                           {"mixing", eq->margin_indifference}};
  write_json(fs::path(cfg.out_dir) / "equilibrium.json", doc);

  io::Csv margins({"margin", "value"});
  margins.add_row({"indifference", dbl(eq->margin_indifference)});
  margins.add_row({"junior_vs_senior", dbl(eq->margin_junior_vs_senior)});
  margins.add_row({"senior_vs_c", dbl(eq->margin_senior_vs_c)});
  margins.add_row({"senior_vs_d", dbl(eq->margin_senior_vs_d)});
  margins.add_row({"always_defect", dbl(eq->margin_always_defect)});
  io::write_file(fs::path(cfg.out_dir) / "margins.csv", margins.text());
  return 0;
}

int run_scan(const RunConfig& cfg) {
  const auto& pd = *cfg.pd;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  io::Csv intervals({"hat_delta", "closed_lo", "closed_hi", "scanned_lo", "scanned_hi",
                     "nonempty"});
  io::Csv grid({"hat_delta", "bar_delta", "feasible", "q", "mu0", "avg_coop"});

  bool any_nonempty = false;
  for (double hat : cfg.scan_hat_deltas) {
    const auto closed = junior_senior::feasibility_interval_closed_form(pd.g, pd.l, hat);
    const auto scanned =
        junior_senior::feasibility_interval(pd.g, pd.l, hat, cfg.scan_resolution);
    if (scanned) any_nonempty = true;
    intervals.add_row({dbl(hat), dbl(closed ? closed->lo : nan), dbl(closed ? closed->hi : nan),
                       dbl(scanned ? scanned->lo : nan), dbl(scanned ? scanned->hi : nan),
                       scanned ? "1" : "0"});

    for (long i = 1; static_cast<double>(i) * cfg.scan_resolution < 1.0; ++i) {
      const double bar = static_cast<double>(i) * cfg.scan_resolution;
      const auto eq = junior_senior::solve(pd.g, pd.l, hat, bar);
      if (eq) {
        grid.add_row({dbl(hat), dbl(bar), "1", dbl(eq->q), dbl(eq->mu0),
                      dbl(junior_senior::average_cooperation(*eq))});
      } else {
        grid.add_row({dbl(hat), dbl(bar), "0", dbl(nan), dbl(nan), "0"});
      }
    }
  }

  io::write_file(fs::path(cfg.out_dir) / "intervals.csv", intervals.text());
  io::write_file(fs::path(cfg.out_dir) / "scan.csv", grid.text());
  return any_nonempty ? 0 : 2;
}

int run_verify(const RunConfig& cfg) {
  const auto resolved = resolve_strategy(cfg);
  if (!resolved) return write_infeasible(cfg, "verify.json");
  const auto& profile = resolved->profile;
  const auto& pop = cfg.populations[0];
  const double delta = pop.delta();

  const auto fixed = self_consistent_distribution(cfg.automaton, profile, cfg.monitoring,
                                                  cfg.game, pop.bar_delta);

  ojson doc;
  doc["feasible"] = true;
  doc["tol"] = cfg.tol;
  doc["params"] = params_json(cfg);
  doc["fixed_point"] = ojson{{"iterations", fixed.iterations}, {"residual", fixed.residual}};
  doc["mu"] = fixed.mu;
  if (resolved->equilibrium) doc["solved_q"] = resolved->equilibrium->q;

  io::Csv incentives({"role", "own_state", "opp_state", "gap"});
  bool certified = true;
  ojson roles = ojson::array();
  for (int role = 0; role < 2; ++role) {
    const auto& opp_mu = fixed.mu[static_cast<std::size_t>(1 - role)];
    const auto value = policy_value(cfg.automaton, profile, role, opp_mu, cfg.monitoring,
                                    cfg.game, delta);
    const auto report = incentive_gap(cfg.automaton, profile, role, opp_mu, value.v,
                                      cfg.monitoring, cfg.game, delta);
    certified = certified && report.certified(cfg.tol);

    ojson role_doc;
    role_doc["max_gap"] = report.max_gap;
    role_doc["erasure_ok"] = report.erasure_ok;
    role_doc["certified"] = report.certified(cfg.tol);
    role_doc["value"] = value.v;
    role_doc["erasure_consistent"] = report.erasure_consistent;
    role_doc["average_payoff"] = average_payoff(fixed.mu[static_cast<std::size_t>(role)], opp_mu,
                                                profile, cfg.game, role);
    if (strictly_dominant_action(cfg.game, role)) {
      role_doc["secure_payoff"] = secure_defection_payoff(
          cfg.automaton, opp_mu, profile.roles[static_cast<std::size_t>(1 - role)], cfg.game,
          role);
    }
    roles.push_back(std::move(role_doc));

    for (int own = 0; own < cfg.automaton.state_count(); ++own) {
      for (int opp = 0; opp < cfg.automaton.state_count(); ++opp) {
        incentives.add_row({std::to_string(role), std::to_string(own), std::to_string(opp),
                            dbl(report.action_gap[static_cast<std::size_t>(own)]
                                                 [static_cast<std::size_t>(opp)])});
      }
    }
  }
  doc["roles"] = std::move(roles);
  doc["certified"] = certified;

  write_json(fs::path(cfg.out_dir) / "verify.json", doc);
  io::write_file(fs::path(cfg.out_dir) / "incentive.csv", incentives.text());
  return certified ? 0 : 2;
}

ojson constants_json(const bounds::ChainConstants& constants) {
  return ojson{{"c_star", constants.c_star},
               {"c_min", constants.c_min},
               {"eta", constants.eta},
               {"v_max", constants.v_max},
               {"v_min", constants.v_min},
               {"d_big", constants.d_big},
               {"delta", constants.delta},
               {"k_bound", constants.k_bound},
               {"x_big", constants.x_big},
               {"band_width", constants.band_width},
               {"dominant_action", constants.dominant_action}};
}

ojson record_bound_json(const bounds::RecordBound& bound) {
  return ojson{{"log2_value", bound.log2_value},
               {"value", bound.value},
               {"vacuous", bound.vacuous}};
}

int run_bounds(const RunConfig& cfg) {
  const auto resolved = resolve_strategy(cfg);
  if (!resolved) return write_infeasible(cfg, "constants.json");
  const auto& profile = resolved->profile;
  const auto& pop = cfg.populations[0];
  const double delta = pop.delta();
  const int role = cfg.bounds_role;
  const int opp = 1 - role;

  const auto fixed = self_consistent_distribution(cfg.automaton, profile, cfg.monitoring,
                                                  cfg.game, pop.bar_delta);
  const auto value = policy_value(cfg.automaton, profile, role,
                                  fixed.mu[static_cast<std::size_t>(opp)], cfg.monitoring,
                                  cfg.game, delta);

  const auto at_delta = bounds::chain_constants(cfg.game, cfg.monitoring, role, delta);
  const auto at_hat = bounds::chain_constants(cfg.game, cfg.monitoring, role, pop.hat_delta);
  const auto report = bounds::band_decomposition(
      cfg.automaton, profile, role, fixed.mu[static_cast<std::size_t>(role)],
      fixed.mu[static_cast<std::size_t>(opp)], value.v, cfg.monitoring, cfg.game, at_delta,
      pop.bar_delta);
  const auto rationality = bounds::rationality_certificate(cfg.automaton, profile,
                                                           cfg.monitoring, cfg.game, fixed.mu);
  const auto crossing = bounds::bar_delta_for_bound(cfg.game, cfg.monitoring, role,
                                                    pop.hat_delta, cfg.bound_target);

  ojson doc;
  doc["feasible"] = true;
  doc["params"] = params_json(cfg);
  doc["role"] = role;
  if (resolved->equilibrium) doc["solved_q"] = resolved->equilibrium->q;
  doc["at_equilibrium_delta"] = constants_json(at_delta);
  doc["at_hat_delta"] = constants_json(at_hat);
  doc["record_bound_at_delta"] = record_bound_json(bounds::record_bound(at_delta, pop.bar_delta));
  doc["record_bound_at_hat_delta"] = record_bound_json(bounds::record_bound(at_hat, pop.bar_delta));
  doc["bar_delta_for_target"] = ojson{{"target", cfg.bound_target},
                                      {"bar_delta", crossing ? ojson(*crossing) : ojson(nullptr)}};
  doc["bands"] = ojson{{"width", report.width},
                       {"anchor", report.anchor},
                       {"band_of_state", report.band_of_state},
                       {"max_band_index", report.max_band_index},
                       {"downward_flow", report.downward_flow},
                       {"average_nondominant", report.average_nondominant},
                       {"required_hold", report.required_hold}};
  write_json(fs::path(cfg.out_dir) / "constants.json", doc);

  io::Csv bands({"band", "mass", "stay", "nondominant", "deviant_stay", "deviant_gain"});
  for (const auto& band : report.bands) {
    bands.add_row({std::to_string(band.index), dbl(band.mass), dbl(band.stay),
                   dbl(band.nondominant), dbl(band.deviant_stay), dbl(band.deviant_gain)});
  }
  io::write_file(fs::path(cfg.out_dir) / "bands.csv", bands.text());

  io::Csv checks({"name", "band", "lhs", "rhs", "holds", "applicable", "required"});
  for (const auto& check : report.checks) {
    checks.add_row({check.name, std::to_string(check.band), dbl(check.lhs), dbl(check.rhs),
                    check.holds ? "1" : "0", check.applicable ? "1" : "0",
                    check.required ? "1" : "0"});
  }
  io::write_file(fs::path(cfg.out_dir) / "checks.csv", checks.text());

  ojson rat;
  rat["rational"] = rationality.rational;
  rat["min_role_nondominant"] = rationality.min_role_nondominant;
  ojson rat_roles = ojson::array();
  for (const auto& r : rationality.roles) {
    rat_roles.push_back(ojson{{"average_payoff", r.average_payoff},
                              {"secure_payoff", r.secure_payoff},
                              {"average_nondominant", r.average_nondominant},
                              {"rational", r.rational}});
  }
  rat["roles"] = std::move(rat_roles);
  write_json(fs::path(cfg.out_dir) / "rationality.json", rat);

  return (report.required_hold && rationality.rational) ? 0 : 2;
}

int run_purify(const RunConfig& cfg) {
  const auto& pd = *cfg.pd;
  const auto& pop = cfg.populations[0];
  const RecordAutomaton aut = junior_senior_automaton();

  if (pd.modularity == Modularity::Submodular) {
    const auto eq = junior_senior::solve(pd.g, pd.l, pop.hat_delta, pop.bar_delta);
    if (!eq) return write_infeasible(cfg, "purify_summary.json");
    const auto report = purification::purification_check(*eq, cfg.purify_epsilons,
                                                         cfg.purify_starts);

    io::Csv csv({"epsilon", "start", "cell", "choice_prob", "distance", "converged"});
    for (const auto& level : report.levels) {
      for (const auto& run : level.runs) {
        double cell_gap = 0.0;
        for (int own = 0; own < 2; ++own) {
          for (int other = 0; other < 2; ++other) {
            const double target = own == 0 ? (other == 0 ? eq->q : 1.0) : 0.0;
            cell_gap = std::max(
                cell_gap, std::abs(run.choice_prob[static_cast<std::size_t>(own)]
                                                  [static_cast<std::size_t>(other)] -
                                   target));
          }
        }
        const double mu_gap = std::max(std::abs(run.mu[0] - eq->mu0),
                                       std::abs(run.mu[1] - eq->mu1));
        const double run_distance = cell_gap + mu_gap;
        for (int own = 0; own < 2; ++own) {
          for (int other = 0; other < 2; ++other) {
            csv.add_row({dbl(level.epsilon), dbl(run.start_q), cell_label(aut, own, other),
                         dbl(run.choice_prob[static_cast<std::size_t>(own)]
                                            [static_cast<std::size_t>(other)]),
                         dbl(run_distance), run.converged ? "1" : "0"});
          }
        }
      }
    }
    io::write_file(fs::path(cfg.out_dir) / "purification.csv", csv.text());

    ojson doc;
    doc["mode"] = "purification_check";
    doc["caveat"] = purification::kEvidenceCaveat;
    doc["feasible"] = true;
    doc["params"] = params_json(cfg);
    doc["q"] = eq->q;
    ojson levels = ojson::array();
    for (const auto& level : report.levels) {
      levels.push_back(ojson{{"epsilon", level.epsilon},
                             {"distance", level.distance},
                             {"best_run", level.best_run}});
    }
    doc["levels"] = std::move(levels);
    doc["decay_slope"] = report.decay_slope;
    doc["slope_defined"] = report.slope_defined;
    doc["decreasing"] = report.decreasing;
    doc["pass"] = report.pass;
    write_json(fs::path(cfg.out_dir) / "purify_summary.json", doc);
    return report.pass ? 0 : 2;
  }

  const auto cert = purification::supermodular_collapse_certificate(
      pd.g, pd.l, pop.hat_delta, pop.bar_delta, cfg.purify_epsilons, cfg.purify_starts,
      cfg.collapse_threshold);

  io::Csv csv({"epsilon", "start", "cell", "choice_prob", "distance", "converged"});
  for (const auto& track : cert.tracks) {
    for (std::size_t i = 0; i < track.junior_junior.size(); ++i) {
      // For the collapse mode, distance is the gap to full defection and the
      // last column reports whether this start's path decays monotonically.
      csv.add_row({dbl(cfg.purify_epsilons[i]), dbl(track.start_q), cell_label(aut, 0, 0),
                   dbl(track.junior_junior[i]), dbl(track.junior_junior[i]),
                   track.decaying ? "1" : "0"});
    }
  }
  io::write_file(fs::path(cfg.out_dir) / "purification.csv", csv.text());

  ojson doc;
  doc["mode"] = "collapse_certificate";
  doc["caveat"] = purification::kEvidenceCaveat;
  doc["params"] = params_json(cfg);
  doc["max_margin"] = cert.max_margin;
  doc["margin_nonpositive"] = cert.margin_nonpositive;
  doc["collapse_threshold"] = cfg.collapse_threshold;
  doc["final_cooperation"] = cert.final_cooperation;
  doc["collapsed"] = cert.collapsed;
  doc["certified"] = cert.certified;
  write_json(fs::path(cfg.out_dir) / "purify_summary.json", doc);
  return cert.certified ? 0 : 2;
}

int run_simulate(const RunConfig& cfg) {
  const auto resolved = resolve_strategy(cfg);
  if (!resolved) return write_infeasible(cfg, "sim_summary.json");
  const auto& profile = resolved->profile;

  sim::SimConfig sc;
  sc.agents = static_cast<int>(cfg.sim_agents);
  sc.periods = static_cast<int>(cfg.sim_periods);
  sc.burn_in = static_cast<int>(cfg.sim_burn_in);
  sc.seed = cfg.seed;
  sc.record_trace = cfg.sim_record_trace;

  const auto result = sim::run(cfg.automaton, profile, cfg.monitoring, cfg.game,
                               cfg.populations, sc);

  if (cfg.sim_record_trace) {
    io::Csv trace({"period", "role", "state", "count", "coop_freq"});
    for (const auto& stats : result.trace) {
      for (int role = 0; role < 2; ++role) {
        const auto& counts = stats.counts[static_cast<std::size_t>(role)];
        for (std::size_t state = 0; state < counts.size(); ++state) {
          trace.add_row({std::to_string(stats.period), std::to_string(role),
                         std::to_string(state), std::to_string(counts[state]),
                         dbl(stats.coop_freq[static_cast<std::size_t>(role)])});
        }
      }
    }
    io::write_file(fs::path(cfg.out_dir) / "trace.csv", trace.text());
  }

  ojson doc;
  doc["feasible"] = true;
  doc["params"] = params_json(cfg);
  doc["agents"] = result.agents;
  doc["periods"] = cfg.sim_periods;
  doc["burn_in"] = cfg.sim_burn_in;
  doc["measured_periods"] = result.measured_periods;
  doc["seed"] = cfg.seed;
  doc["mu"] = result.mu;
  doc["action_freq"] = result.action_freq;
  doc["mean_payoff"] = result.mean_payoff;
  doc["births"] = result.births;
  doc["deaths"] = result.deaths;
  if (resolved->equilibrium) doc["solved_q"] = resolved->equilibrium->q;

  if (cfg.populations[0].hat_delta == cfg.populations[1].hat_delta &&
      cfg.populations[0].bar_delta == cfg.populations[1].bar_delta) {
    const auto fixed = self_consistent_distribution(cfg.automaton, profile, cfg.monitoring,
                                                    cfg.game, cfg.populations[0].bar_delta);
    const auto comparison = sim::compare(result, fixed.mu, cfg.sim_compare_tolerance);
    ojson cmp;
    cmp["tolerance"] = cfg.sim_compare_tolerance;
    cmp["max_deviation"] = comparison.max_deviation;
    cmp["pass"] = comparison.pass;
    ojson rows = ojson::array();
    for (std::size_t role = 0; role < comparison.states.size(); ++role) {
      for (std::size_t state = 0; state < comparison.states[role].size(); ++state) {
        const auto& s = comparison.states[role][state];
        rows.push_back(ojson{{"role", role},
                             {"state", state},
                             {"empirical", s.empirical},
                             {"analytic", s.analytic},
                             {"deviation", s.deviation},
                             {"z", s.z}});
      }
    }
    cmp["states"] = std::move(rows);
    doc["comparison"] = std::move(cmp);
  }

  write_json(fs::path(cfg.out_dir) / "sim_summary.json", doc);
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  struct Row {
    double g = 0.0, l = 0.0, hat = 0.0, bar = 0.0;
    bool feasible = false;
    double q = 0.0, mu0 = 0.0, v0 = 0.0, v1 = 0.0, avg_coop = 0.0;
    double margin_b = 0.0, margin_d = 0.0;
  };

  const std::size_t ng = cfg.sweep_g.size();
  const std::size_t nl = cfg.sweep_l.size();
  const std::size_t nh = cfg.sweep_hat_delta.size();
  const std::size_t nb = cfg.sweep_bar_delta.size();
  const std::size_t total = ng * nl * nh * nb;
  if (total > 20000000) throw ConfigInvalid("sweep grid exceeds 2e7 points");

  std::vector<Row> rows(total);
  const auto evaluate = [&](std::size_t index) {
    std::size_t rest = index;
    const std::size_t ib = rest % nb;
    rest /= nb;
    const std::size_t ih = rest % nh;
    rest /= nh;
    const std::size_t il = rest % nl;
    rest /= nl;
    const std::size_t ig = rest;

    Row row;
    row.g = cfg.sweep_g[ig];
    row.l = cfg.sweep_l[il];
    row.hat = cfg.sweep_hat_delta[ih];
    row.bar = cfg.sweep_bar_delta[ib];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.q = row.mu0 = row.v0 = row.v1 = row.avg_coop = row.margin_b = row.margin_d = nan;

    if (row.g > row.l) {
      const auto eq = junior_senior::solve(row.g, row.l, row.hat, row.bar);
      if (eq) {
        row.feasible = true;
        row.q = eq->q;
        row.mu0 = eq->mu0;
        row.v0 = eq->v0;
        row.v1 = eq->v1;
        row.avg_coop = junior_senior::average_cooperation(*eq);
        row.margin_b = eq->margin_junior_vs_senior;
        row.margin_d = eq->margin_always_defect;
      }
    }
    rows[index] = row;
  };

  const unsigned workers = std::min<unsigned>(worker_threads(),
                                              static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  if (workers <= 1 || total < 2) {
    for (std::size_t i = 0; i < total; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            evaluate(i);
          }
        } catch (...) {
          const std::lock_guard<std::mutex> hold(failure_lock);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  io::Csv csv({"g", "l", "hat_delta", "bar_delta", "feasible", "q", "mu0", "v0", "v1",
               "avg_coop", "margin_b", "margin_d"});
  for (const auto& row : rows) {
    csv.add_row({dbl(row.g), dbl(row.l), dbl(row.hat), dbl(row.bar), row.feasible ? "1" : "0",
                 dbl(row.q), dbl(row.mu0), dbl(row.v0), dbl(row.v1), dbl(row.avg_coop),
                 dbl(row.margin_b), dbl(row.margin_d)});
  }
  io::write_file(fs::path(cfg.out_dir) / "sweep.csv", csv.text());
  return 0;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "solve") return Command::Solve;
  if (name == "scan") return Command::Scan;
  if (name == "verify") return Command::Verify;
  if (name == "bounds") return Command::Bounds;
  if (name == "purify") return Command::Purify;
  if (name == "simulate") return Command::Simulate;
  if (name == "sweep") return Command::Sweep;
  throw ConfigInvalid("unknown command '" + name + "'");
}

unsigned worker_threads() {
  if (const char* env = std::getenv("ERASABLE_RECORDS_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 1 || parsed > 4096) {
      throw ConfigInvalid("ERASABLE_RECORDS_THREADS must be an integer in 1..4096");
    }
    return static_cast<unsigned>(parsed);
  }
  const unsigned cores = std::thread::hardware_concurrency();
  return cores == 0 ? 1 : cores;
}

RunConfig load_config(Command command, const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(std::string("malformed JSON config: ") + e.what());
  }

  RunConfig cfg;
  cfg.command = command;

  std::vector<const char*> allowed = {"out", "tol"};
  if (command != Command::Sweep) allowed.push_back("game");
  if (command_takes_population(command)) allowed.push_back("population");
  if (command_takes_strategy(command)) {
    allowed.push_back("monitoring");
    allowed.push_back("automaton");
    allowed.push_back("strategy");
  }
  if (command == Command::Simulate) allowed.push_back("seed");
  if (const char* block = command_block_name(command)) allowed.push_back(block);
  {
    require_object(doc, "$");
    for (const auto& item : doc.items()) {
      bool known = false;
      for (const char* key : allowed) {
        if (item.key() == key) {
          known = true;
          break;
        }
      }
      if (!known) throw ConfigInvalid("unknown key '" + item.key() + "' at $");
    }
  }

  if (command != Command::Sweep) {
    ParsedGame parsed = parse_game(member(doc, "$", "game"), "$.game");
    cfg.game = std::move(parsed.game);
    cfg.pd = parsed.pd;
    if (command_requires_pd(command) && !cfg.pd) {
      fail("$.game", "this command requires the pd form {\"pd\": {\"g\": ..., \"l\": ...}}");
    }
  }

  if (command_takes_population(command)) {
    cfg.populations = parse_populations(member(doc, "$", "population"), "$.population");
  }

  if (command_takes_strategy(command)) {
    if (doc.contains("monitoring")) {
      cfg.monitoring = parse_monitoring(doc.at("monitoring"), "$.monitoring", cfg.game);
    } else {
      cfg.monitoring = perfect_monitoring(cfg.game);
    }
    cfg.automaton = doc.contains("automaton")
                        ? parse_automaton(doc.at("automaton"), "$.automaton")
                        : junior_senior_automaton();
    if (cfg.monitoring.signal_count(0) != cfg.automaton.signal_count() ||
        cfg.monitoring.signal_count(1) != cfg.automaton.signal_count()) {
      fail("$.automaton", "the step table's signal alphabet must match the monitoring signals");
    }
    if (doc.contains("strategy")) {
      parse_strategy(doc.at("strategy"), "$.strategy", cfg);
    }
  }

  // The analytic strategy sources only make sense on the two-state automaton.
  if (command_takes_strategy(command) && cfg.strategy_source != StrategySource::Explicit) {
    if (!is_junior_senior_shape(cfg.automaton)) {
      fail("$.strategy", "solved and junior_senior strategies require the junior_senior automaton");
    }
    if (cfg.game.action_count(0) != 2 || cfg.game.action_count(1) != 2) {
      fail("$.strategy", "solved and junior_senior strategies require two actions per role");
    }
  }
  if (command_takes_strategy(command) && cfg.strategy_source == StrategySource::Solved &&
      !cfg.pd) {
    fail("$.strategy", "the solved strategy requires the pd game form");
  }

  const bool needs_equal_populations =
      command == Command::Solve || command == Command::Verify || command == Command::Bounds ||
      command == Command::Purify ||
      (command == Command::Simulate && cfg.strategy_source == StrategySource::Solved);
  if (needs_equal_populations && !cfg.populations.empty() &&
      (cfg.populations[0].hat_delta != cfg.populations[1].hat_delta ||
       cfg.populations[0].bar_delta != cfg.populations[1].bar_delta)) {
    fail("$.population", "this command requires both populations to share demographics");
  }

  switch (command) {
    case Command::Scan:
      parse_scan_block(member(doc, "$", "scan"), cfg);
      break;
    case Command::Bounds:
      if (doc.contains("bounds")) parse_bounds_block(doc.at("bounds"), cfg);
      break;
    case Command::Purify:
      parse_purify_block(member(doc, "$", "purify"), cfg);
      break;
    case Command::Simulate:
      if (doc.contains("sim")) parse_sim_block(doc.at("sim"), cfg);
      break;
    case Command::Sweep:
      parse_sweep_block(member(doc, "$", "sweep"), cfg);
      break;
    default:
      break;
  }

  if (doc.contains("tol")) {
    cfg.tol = get_double(doc.at("tol"), "$.tol");
    if (!(cfg.tol > 0.0)) fail("$.tol", "expected a positive value");
  }
  if (doc.contains("seed")) {
    const long long seed = get_integer(doc.at("seed"), "$.seed");
    if (seed < 0) fail("$.seed", "expected a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (doc.contains("out")) cfg.out_dir = get_string(doc.at("out"), "$.out");
  if (const char* env = std::getenv("ERASABLE_RECORDS_OUT")) cfg.out_dir = env;
  if (overrides.out) cfg.out_dir = *overrides.out;
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.tol) {
    if (!(*overrides.tol > 0.0)) throw ConfigInvalid("--tol must be positive");
    cfg.tol = *overrides.tol;
  }
  return cfg;
}

int dispatch(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Solve:
      return run_solve(cfg);
    case Command::Scan:
      return run_scan(cfg);
    case Command::Verify:
      return run_verify(cfg);
    case Command::Bounds:
      return run_bounds(cfg);
    case Command::Purify:
      return run_purify(cfg);
    case Command::Simulate:
      return run_simulate(cfg);
    case Command::Sweep:
      return run_sweep(cfg);
  }
  throw Error("unreachable command");
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Solver and simulator for repeated random-matching games with erasable records"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double tol = 0.0;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"solve", "Solve the two-state mixing equilibrium for one parameter point"},
      {"scan", "Scan survival probabilities for the feasible cooperation interval"},
      {"verify", "Audit a strategy profile with the one-shot deviation check"},
      {"bounds", "Derive band constants, measured chain checks, and the record bound"},
      {"purify", "Run the shock-perturbation evidence check"},
      {"simulate", "Run the finite-population Monte Carlo"},
      {"sweep", "Tabulate equilibria over a parameter grid"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides config and environment)");
    sub->add_option("--seed", seed, "Simulation seed override");
    sub->add_option("--tol", tol, "Certification tolerance override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    Overrides overrides;
    if (sub->count("--out") > 0) overrides.out = out_dir;
    if (sub->count("--seed") > 0) overrides.seed = seed;
    if (sub->count("--tol") > 0) overrides.tol = tol;
    const RunConfig cfg = load_config(parse_command(sub->get_name()), config_path, overrides);
    return dispatch(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace erec::cli
