#include "eprauth/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "eprauth/acceptance.hpp"

namespace eprauth {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown field '" + key + "' in " + where);
}

double get_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
  return v;
}

int get_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < -1'000'000'000 || v > 1'000'000'000) throw ConfigError(what + " is out of range");
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& what) {
  if (!j.is_string()) throw ConfigError(what + " must be a string");
  return j.get<std::string>();
}

Complex get_complex(const json& j, const std::string& what) {
  if (j.is_number()) return {get_number(j, what), 0.0};
  if (j.is_array() && j.size() == 2) return {get_number(j[0], what), get_number(j[1], what)};
  throw ConfigError(what + " must be a number or [re, im]");
}

Qubit get_qubit(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(what + " must be [a, b]");
  return {get_complex(j[0], what + "[0]"), get_complex(j[1], what + "[1]")};
}

template <int N>
Eigen::Matrix<Complex, N, N> get_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != N) throw ConfigError(what + " must have " + std::to_string(N) + " rows");
  Eigen::Matrix<Complex, N, N> m;
  for (int r = 0; r < N; ++r) {
    if (!j[r].is_array() || j[r].size() != N)
      throw ConfigError(what + " must have " + std::to_string(N) + " columns");
    for (int c = 0; c < N; ++c) m(r, c) = get_complex(j[r][c], what);
  }
  return m;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : ""; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (!config.out) {
    out << text;
    return;
  }
  std::ofstream file(*config.out, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + *config.out + "'");
  file << text;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

EveStrategy parse_strategy(StrategyKind kind, const json& params, const SessionConfig& session,
                           bool* optimize_phases) {
  if (!params.is_object()) throw ConfigError("strategy_params must be an object");
  check_keys(params,
             {"ensemble", "forward_tamper", "return_unitary", "theta", "phi1", "phi2",
              "target_pairs", "extra_return_requests", "optimize_phases"},
             "strategy_params");
  EveStrategy s;
  s.kind = kind;
  s.theta = session.theta_mode == ThetaMode::Fixed ? session.fixed_theta : 0.0;

  if (params.contains("ensemble")) {
    const json& e = params["ensemble"];
    if (!e.is_array() || e.empty()) throw ConfigError("ensemble must be a non-empty array");
    for (const auto& c : e) {
      if (!c.is_object()) throw ConfigError("ensemble entries must be objects");
      check_keys(c, {"p", "state"}, "ensemble entry");
      if (!c.contains("p") || !c.contains("state"))
        throw ConfigError("ensemble entries need 'p' and 'state'");
      s.ensemble.push_back({get_number(c["p"], "ensemble p"), get_qubit(c["state"], "ensemble state")});
    }
  }
  if (params.contains("forward_tamper")) {
    const json& t = params["forward_tamper"];
    if (!t.is_object() || t.size() != 1)
      throw ConfigError("forward_tamper must be {\"unitary\": ...} or {\"measure\": ...}");
    if (t.contains("unitary")) {
      s.forward_tamper.mode = ForwardTamper::Mode::Unitary;
      s.forward_tamper.unitary = get_matrix<2>(t["unitary"], "forward_tamper.unitary");
    } else if (t.contains("measure")) {
      s.forward_tamper.mode = ForwardTamper::Mode::Measurement;
      s.forward_tamper.basis = get_qubit(t["measure"], "forward_tamper.measure");
    } else {
      throw ConfigError("forward_tamper must be {\"unitary\": ...} or {\"measure\": ...}");
    }
  }
  if (params.contains("return_unitary")) {
    const json& u = params["return_unitary"];
    if (u.is_string()) {
      const std::string name = u.get<std::string>();
      if (name == "swap")
        s.return_unitary = swap_matrix();
      else if (name == "identity")
        s.return_unitary = Matrix4::Identity();
      else
        throw ConfigError("return_unitary must be \"identity\", \"swap\" or a 4x4 matrix");
    } else {
      s.return_unitary = get_matrix<4>(u, "return_unitary");
    }
  }
  if (params.contains("theta")) s.theta = get_number(params["theta"], "theta");
  if (params.contains("phi1")) s.phi1 = get_number(params["phi1"], "phi1");
  if (params.contains("phi2")) s.phi2 = get_number(params["phi2"], "phi2");
  if (params.contains("target_pairs")) {
    const json& t = params["target_pairs"];
    if (!t.is_array()) throw ConfigError("target_pairs must be an array");
    for (const auto& i : t) s.target_pairs.push_back(get_int(i, "target_pairs entry"));
  }
  if (params.contains("extra_return_requests"))
    s.extra_return_requests = get_int(params["extra_return_requests"], "extra_return_requests");
  if (params.contains("optimize_phases")) {
    if (!params["optimize_phases"].is_boolean()) throw ConfigError("optimize_phases must be a boolean");
    if (optimize_phases) *optimize_phases = params["optimize_phases"].get<bool>();
  }
  validate(s);
  return s;
}

ScenarioFile parse_scenario(const json& doc, std::optional<std::uint64_t> seed,
                            std::optional<int> trials) {
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  check_keys(doc,
             {"K", "K_prime", "theta_mode", "strategy", "strategy_params", "quantity", "estimator",
              "challenge_ensemble", "trials", "seed", "rounds", "sweep"},
             "scenario");
  ScenarioFile f;
  Scenario& sc = f.scenario;
  SessionConfig& cfg = sc.session;

  if (doc.contains("K")) cfg.K = get_int(doc["K"], "K");
  if (doc.contains("K_prime")) cfg.K_prime = get_int(doc["K_prime"], "K_prime");
  if (doc.contains("theta_mode")) {
    const json& t = doc["theta_mode"];
    if (t.is_string() && t.get<std::string>() == "random") {
      cfg.theta_mode = ThetaMode::PerPairRandom;
    } else if (t.is_object() && t.size() == 1 && t.contains("fixed")) {
      cfg.theta_mode = ThetaMode::Fixed;
      cfg.fixed_theta = get_number(t["fixed"], "theta_mode.fixed");
    } else {
      throw ConfigError("theta_mode must be \"random\" or {\"fixed\": theta}");
    }
  }
  if (doc.contains("challenge_ensemble")) {
    const std::string e = get_string(doc["challenge_ensemble"], "challenge_ensemble");
    if (e == "haar")
      cfg.challenge_ensemble = ChallengeEnsemble::Haar;
    else if (e == "real")
      cfg.challenge_ensemble = ChallengeEnsemble::RealAmplitude;
    else
      throw ConfigError("challenge_ensemble must be \"haar\" or \"real\"");
  }

  std::optional<StrategyKind> kind;
  if (doc.contains("strategy") && !doc["strategy"].is_null()) {
    const std::string name = get_string(doc["strategy"], "strategy");
    if (name != "none") {
      kind = parse_strategy_kind(name);
      if (!kind) throw ConfigError("unknown strategy '" + name + "'");
    }
  }
  const json params = doc.contains("strategy_params") ? doc["strategy_params"] : json::object();
  if (kind) {
    sc.strategy = parse_strategy(*kind, params, cfg, &sc.optimize_phases);
  } else if (!params.is_object() || !params.empty()) {
    throw ConfigError("strategy_params given without a strategy");
  }

  if (doc.contains("quantity")) {
    const std::string q = get_string(doc["quantity"], "quantity");
    const auto parsed = parse_quantity(q);
    if (!parsed) throw ConfigError("unknown quantity '" + q + "'");
    sc.quantity = *parsed;
  }
  if (doc.contains("estimator")) {
    const std::string e = get_string(doc["estimator"], "estimator");
    const auto parsed = parse_estimator(e);
    if (!parsed) throw ConfigError("unknown estimator '" + e + "'");
    sc.estimator = *parsed;
  }

  if (seed) {
    f.seed = *seed;
  } else if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    f.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.seed = f.seed;
  if (trials)
    sc.trials = *trials;
  else if (doc.contains("trials"))
    sc.trials = get_int(doc["trials"], "trials");

  if (doc.contains("rounds")) {
    f.rounds = get_int(doc["rounds"], "rounds");
    if (*f.rounds < 1) throw ConfigError("rounds must be >= 1");
  }
  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    if (!s.is_object()) throw ConfigError("sweep must be an object");
    check_keys(s, {"theta"}, "sweep");
    if (!s.contains("theta")) throw ConfigError("sweep needs a 'theta' grid");
    const json& t = s["theta"];
    if (t.is_array()) {
      for (const auto& v : t) f.sweep_thetas.push_back(get_number(v, "sweep.theta entry"));
    } else if (t.is_object()) {
      check_keys(t, {"from", "to", "points"}, "sweep.theta");
      if (!t.contains("from") || !t.contains("to") || !t.contains("points"))
        throw ConfigError("sweep.theta needs from, to and points");
      f.sweep_thetas = theta_grid(get_number(t["from"], "sweep.theta.from"),
                                  get_number(t["to"], "sweep.theta.to"),
                                  get_int(t["points"], "sweep.theta.points"));
    } else {
      throw ConfigError("sweep.theta must be an array or {from, to, points}");
    }
    if (f.sweep_thetas.empty()) throw ConfigError("sweep.theta is empty");
  }

  validate(sc);
  f.echo = doc;
  f.echo["seed"] = f.seed;
  f.echo["trials"] = sc.trials;
  return f;
}

json to_json(const RoundResult& r) {
  json challenges = json::array();
  for (const auto& c : r.challenges) {
    challenges.push_back({{"direction", to_string(c.direction)},
                          {"pair_index", c.pair_index},
                          {"challenge", {{c.a.real(), c.a.imag()}, {c.b.real(), c.b.imag()}}},
                          {"prob_pass", c.prob_pass},
                          {"outcome", c.outcome == Outcome::Pass ? "pass" : "fail"}});
  }
  return {{"session_number", r.session_number},
          {"verdict", to_string(r.verdict)},
          {"abort_reason", to_string(r.abort_reason)},
          {"keys_retained", r.keys_retained},
          {"acceptance_probability", r.acceptance_probability},
          {"challenges", challenges},
          {"discarded_pairs", r.discarded_pairs},
          {"announced_indices", r.announced_indices},
          {"return_requests",
           {{"to_alice", r.return_requests.at(0)}, {"to_bob", r.return_requests.at(1)}}}};
}

json to_json(const Estimate& e) {
  return {{"quantity", to_string(e.quantity)},
          {"parameter", optional_json(e.parameter)},
          {"mean", e.mean},
          {"standard_error", e.standard_error},
          {"ci_low", e.ci_low},
          {"ci_high", e.ci_high},
          {"trials", e.trials},
          {"oracle", optional_json(e.oracle)},
          {"z", optional_json(e.z)}};
}

int cmd_session(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (!config.scenario_path) throw ConfigError("--scenario is required");
    const ScenarioFile f = parse_scenario(load_json(*config.scenario_path), config.seed);
    const Scenario& sc = f.scenario;

    AuthSession session(sc.session);
    std::unique_ptr<Eavesdropper> eve;
    if (sc.strategy) eve = std::make_unique<Eavesdropper>(*sc.strategy);
    const bool two_phase = sc.strategy && uses_ghz_share(sc.strategy->kind);
    const int rounds = f.rounds.value_or(two_phase ? 2 : 1);

    Scenario accept = sc;
    accept.quantity = Quantity::Acceptance;
    const std::optional<double> analytic = oracle_for(accept);

    json results = json::array();
    bool aborted = false;
    std::size_t seen_records = 0;
    for (int k = 0; k < rounds && !aborted; ++k) {
      const RoundResult r = session.run_round(eve.get());
      json j = to_json(r);
      j["analytic_acceptance"] = two_phase && k == 0 ? json(1.0) : optional_json(analytic);
      if (eve) {
        json records = json::array();
        const auto& rec = eve->state().accumulated_key;
        for (; seen_records < rec.size(); ++seen_records)
          records.push_back({{"pair_index", rec[seen_records].pair_index},
                             {"fidelity", rec[seen_records].fidelity}});
        j["eve_key_records"] = records;
      }
      aborted = r.verdict == Verdict::Aborted;
      results.push_back(j);
    }

    std::string text;
    if (config.format.value_or(ReportFormat::Json) == ReportFormat::Json) {
      const json report{{"schema_version", kSchemaVersion},
                        {"config_echo", f.echo},
                        {"results", results}};
      text = report.dump(2) + "\n";
    } else {
      std::ostringstream csv;
      csv << "session_number,verdict,abort_reason,keys_retained,acceptance_probability,"
             "analytic_acceptance,challenges,min_prob_pass\n";
      for (const auto& j : results) {
        double min_pass = 1.0;
        for (const auto& c : j["challenges"]) min_pass = std::min(min_pass, c["prob_pass"].get<double>());
        csv << j["session_number"].get<int>() << ',' << j["verdict"].get<std::string>() << ','
            << j["abort_reason"].get<std::string>() << ','
            << (j["keys_retained"].get<bool>() ? "true" : "false") << ','
            << number(j["acceptance_probability"].get<double>()) << ','
            << (j["analytic_acceptance"].is_null() ? "" : number(j["analytic_acceptance"].get<double>()))
            << ',' << j["challenges"].size() << ',' << number(min_pass) << '\n';
      }
      text = csv.str();
    }
    emit(config, text, out);
    return aborted ? 1 : 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (!config.scenario_path) throw ConfigError("--scenario is required");
    const ScenarioFile f =
        parse_scenario(load_json(*config.scenario_path), config.seed, config.trials);
    std::vector<Estimate> estimates;
    if (f.sweep_thetas.empty())
      estimates.push_back(run(f.scenario, f.seed, config.threads));
    else
      estimates = sweep(f.scenario, f.sweep_thetas, f.seed, config.threads);

    const std::string strategy =
        f.scenario.strategy ? to_string(f.scenario.strategy->kind) : std::string("none");
    std::string text;
    if (config.format.value_or(ReportFormat::Json) == ReportFormat::Json) {
      json results = json::array();
      for (const auto& e : estimates) {
        json j = to_json(e);
        j["strategy"] = strategy;
        j["estimator"] = to_string(f.scenario.estimator);
        results.push_back(j);
      }
      const json report{{"schema_version", kSchemaVersion},
                        {"config_echo", f.echo},
                        {"results", results}};
      text = report.dump(2) + "\n";
    } else {
      std::ostringstream csv;
      csv << "strategy,quantity,estimator,parameter,mean,standard_error,ci_low,ci_high,trials,"
             "oracle,z\n";
      for (const auto& e : estimates) {
        csv << csv_escape(strategy) << ',' << to_string(e.quantity) << ','
            << to_string(f.scenario.estimator) << ',' << optional_number(e.parameter) << ','
            << number(e.mean) << ',' << number(e.standard_error) << ',' << number(e.ci_low) << ','
            << number(e.ci_high) << ',' << e.trials << ',' << optional_number(e.oracle) << ','
            << optional_number(e.z) << '\n';
      }
      text = csv.str();
    }
    emit(config, text, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_reproduce_paper(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    AcceptanceOptions options;
    if (config.seed) options.seed = *config.seed;
    options.threads = config.threads;
    const auto rows = run_acceptance(options);

    std::string text;
    if (!config.format) {
      std::ostringstream s;
      print_rows(rows, s);
      text = s.str();
    } else if (*config.format == ReportFormat::Json) {
      json results = json::array();
      for (const auto& r : rows)
        results.push_back({{"id", r.id},
                           {"title", r.title},
                           {"passed", r.passed},
                           {"gating", r.gating},
                           {"detail", r.detail}});
      const json report{{"schema_version", kSchemaVersion},
                        {"config_echo", {{"seed", options.seed}}},
                        {"results", results}};
      text = report.dump(2) + "\n";
    } else {
      std::ostringstream csv;
      csv << "id,title,passed,gating,detail\n";
      for (const auto& r : rows)
        csv << r.id << ',' << csv_escape(r.title) << ',' << (r.passed ? "true" : "false") << ','
            << (r.gating ? "true" : "false") << ',' << csv_escape(r.detail) << '\n';
      text = csv.str();
    }
    emit(config, text, out);
    return all_gating_passed(rows) ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EPR-pair quantum authentication simulator", "eprauth"};
  app.require_subcommand(1);

  RunConfig config;
  std::string scenario;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string format;
  std::string out_path;

  auto common = [&](CLI::App* sub, bool needs_scenario, bool has_trials) {
    if (needs_scenario)
      sub->add_option("--scenario", scenario, "Scenario JSON file")->required();
    sub->add_option("--seed", seed, "Master seed (overrides the file)");
    if (has_trials)
      sub->add_option("--trials", trials, "Trial count (overrides the file)")
          ->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out_path, "Write the report to this file");
    sub->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
  };
  auto* session = app.add_subcommand("session", "Run authentication rounds for a scenario");
  common(session, true, false);
  auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimate with oracle comparison");
  common(estimate, true, true);
  auto* reproduce = app.add_subcommand("reproduce-paper", "Run every acceptance check");
  common(reproduce, false, false);

  std::vector<const char*> argv{"eprauth"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  auto* active = app.get_subcommands().front();
  config.command = active->get_name();
  if (!scenario.empty()) config.scenario_path = scenario;
  auto given = [active](const char* name) {
    const CLI::Option* opt = active->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--seed")) config.seed = seed;
  if (given("--trials")) config.trials = trials;
  if (!format.empty()) config.format = format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
  if (!out_path.empty()) config.out = out_path;

  if (active == session) return cmd_session(config, out, err);
  if (active == estimate) return cmd_estimate(config, out, err);
  return cmd_reproduce_paper(config, out, err);
}

}  // namespace eprauth
