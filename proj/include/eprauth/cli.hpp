// Command-line front end: declarative scenario files in, deterministic JSON or
// CSV reports out.
//
// Scenario file fields:
//   K, K_prime            integers, 1 <= K_prime <= K
//   theta_mode            "random" | {"fixed": theta}
//   strategy              "none" or a strategy name (see to_string(StrategyKind))
//   strategy_params       object, see parse_strategy()
//   quantity              "acceptance" | "pass" | "detection" | "key_fidelity"
//   estimator             "exact" (default) | "sampled"
//   challenge_ensemble    "haar" (default) | "real"
//   trials, seed          overridden by --trials / --seed
//   rounds                session command only; default 2 for GHZ strategies, else 1
//   sweep                 {"theta": [..]} or {"theta": {"from": a, "to": b, "points": n}}
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eprauth/montecarlo.hpp"

namespace eprauth {

inline constexpr int kSchemaVersion = 1;

enum class ReportFormat { Json, Csv };

struct RunConfig {
  std::string command;
  std::optional<std::string> scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<ReportFormat> format;  ///< default json; reproduce-paper defaults to text
  std::optional<std::string> out;
  unsigned threads = 0;
};

struct ScenarioFile {
  Scenario scenario;
  std::uint64_t seed = 0;
  std::optional<int> rounds;
  std::vector<double> sweep_thetas;  ///< empty: no sweep
  nlohmann::json echo;               ///< input with effective seed and trials
};

/// strategy_params:
///   ensemble          [{"p": w, "state": [a, b]}], amplitudes real or [re, im]
///   forward_tamper    {"unitary": 2x2} | {"measure": [a, b]}
///   return_unitary    "identity" | "swap" | 4x4
///   theta, phi1, phi2, target_pairs, extra_return_requests, optimize_phases
EveStrategy parse_strategy(StrategyKind kind, const nlohmann::json& params,
                           const SessionConfig& session, bool* optimize_phases = nullptr);

/// Throws ConfigError on any malformed or unknown field.
ScenarioFile parse_scenario(const nlohmann::json& doc, std::optional<std::uint64_t> seed = {},
                            std::optional<int> trials = {});

nlohmann::json to_json(const RoundResult& r);
nlohmann::json to_json(const Estimate& e);

/// Exit codes: 0 accepted, 1 aborted, 2 configuration error.
int cmd_session(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Exit codes: 0 success, 2 configuration error.
int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Exit code 0 iff every gating acceptance row passes.
int cmd_reproduce_paper(const RunConfig& config, std::ostream& out, std::ostream& err);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eprauth
