#include "eprauth/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <numbers>
#include <thread>

#include "eprauth/analysis.hpp"

namespace eprauth {

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::Acceptance: return "acceptance";
    case Quantity::Pass: return "pass";
    case Quantity::Detection: return "detection";
    case Quantity::KeyFidelity: return "key_fidelity";
  }
  return "unknown";
}

std::string to_string(Estimator e) { return e == Estimator::Sampled ? "sampled" : "exact"; }

std::optional<Quantity> parse_quantity(std::string_view name) {
  for (auto q : {Quantity::Acceptance, Quantity::Pass, Quantity::Detection, Quantity::KeyFidelity})
    if (to_string(q) == name) return q;
  return std::nullopt;
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  for (auto e : {Estimator::Exact, Estimator::Sampled})
    if (to_string(e) == name) return e;
  return std::nullopt;
}

namespace {

bool records_key(StrategyKind k) {
  return k == StrategyKind::InterceptReturn || k == StrategyKind::QuarterPiKeySteal ||
         k == StrategyKind::FixedAngleKeySteal;
}

bool needs_fixed_angle(StrategyKind k) {
  return k == StrategyKind::FixedAngleImpersonate || k == StrategyKind::FixedAngleKeySteal;
}

bool bernoulli(const Scenario& s) {
  return s.estimator == Estimator::Sampled && s.quantity != Quantity::KeyFidelity;
}

bool quarter_pi_aligned(double theta) {
  return std::abs(std::remainder(theta - std::numbers::pi / 4.0, std::numbers::pi)) < 1e-9;
}

Scenario resolve(const Scenario& s) {
  Scenario out = s;
  if (out.optimize_phases && out.strategy) {
    const KeyStealOptimum best = maximize_key_steal(out.strategy->theta);
    out.strategy->phi1 = best.phi1;
    out.strategy->phi2 = best.phi2;
  }
  return out;
}

double per_challenge(const RoundResult& r, const Scenario& s) {
  if (r.challenges.empty()) return s.quantity == Quantity::Detection ? 1.0 : 0.0;
  const ChallengeRecord& c = r.challenges.front();
  const double pass = s.estimator == Estimator::Exact ? c.prob_pass
                                                      : (c.outcome == Outcome::Pass ? 1.0 : 0.0);
  return s.quantity == Quantity::Detection ? 1.0 - pass : pass;
}

}  // namespace

void validate(const Scenario& s) {
  validate(s.session);
  if (s.trials < 1) throw ConfigError("trials must be >= 1");
  if (s.strategy) {
    validate(*s.strategy);
    if (needs_fixed_angle(s.strategy->kind) && s.session.theta_mode != ThetaMode::Fixed)
      throw ConfigError(to_string(s.strategy->kind) + " requires a fixed theta_mode");
    if (s.quantity == Quantity::KeyFidelity && !records_key(s.strategy->kind))
      throw ConfigError(to_string(s.strategy->kind) + " does not copy the key");
  }
  if (s.optimize_phases && (!s.strategy || s.strategy->kind != StrategyKind::FixedAngleKeySteal))
    throw ConfigError("optimize_phases applies to fixed_angle_key_steal only");
}

std::optional<double> oracle_for(const Scenario& s) {
  const int kp = s.session.K_prime;
  const bool fixed = s.session.theta_mode == ThetaMode::Fixed;
  const double theta = s.session.fixed_theta;

  // Per-challenge pass probability p, with acceptance p^K' when every
  // challenge in the attacked direction is hit the same way.
  std::optional<double> pass;
  std::optional<double> key;
  bool uniform_targets = true;

  if (!s.strategy) {
    pass = 1.0;
    key = 1.0;
  } else {
    const EveStrategy& e = *s.strategy;
    uniform_targets = e.target_pairs.empty() && e.extra_return_requests == 0;
    if (!e.target_pairs.empty() &&
        std::find(e.target_pairs.begin(), e.target_pairs.end(), 1) == e.target_pairs.end())
      return std::nullopt;
    const ChallengeEnsemble ens = s.session.challenge_ensemble;
    switch (e.kind) {
      case StrategyKind::RandomImpersonation:
        pass = 0.5;
        break;
      case StrategyKind::GhzInject:
        pass = 1.0 - (fixed ? ghz_detection(theta) : kGhzDetectionAverage);
        break;
      case StrategyKind::FixedAngleImpersonate:
        if (fixed && e.theta == theta) pass = p1(theta);
        break;
      case StrategyKind::QuarterPiKeySteal:
        if (fixed && quarter_pi_aligned(theta)) {
          pass = 1.0;
          key = 1.0;
        }
        break;
      case StrategyKind::FixedAngleKeySteal:
        if (fixed && s.optimize_phases && e.theta == theta) key = p2(theta);
        break;
      case StrategyKind::InterceptForward:
        pass = 1.0 - design_average(ens, [&](const Challenge& c) {
                 return intercept_forward_detection(c, e.forward_tamper);
               });
        break;
      case StrategyKind::InterceptReturn:
        pass = 1.0 - design_average(ens, [&](const Challenge& c) {
                 return intercept_return_entangle(c, e.return_unitary).detection;
               });
        key = design_average(ens, [&](const Challenge& c) {
          return intercept_return_entangle(c, e.return_unitary).eve_fidelity;
        });
        break;
    }
  }

  switch (s.quantity) {
    case Quantity::Pass: return pass;
    case Quantity::Detection:
      if (pass) return 1.0 - *pass;
      return std::nullopt;
    case Quantity::Acceptance:
      if (pass && uniform_targets) return std::pow(*pass, kp);
      return std::nullopt;
    case Quantity::KeyFidelity: return key;
  }
  return std::nullopt;
}

double run_trial(const Scenario& s, Rng& rng) {
  SessionConfig config = s.session;
  config.seed = rng();
  AuthSession session(config);
  std::unique_ptr<Eavesdropper> eve;
  if (s.strategy) eve = std::make_unique<Eavesdropper>(*s.strategy);

  if (eve && uses_ghz_share(eve->strategy().kind)) {
    // The first round plants the GHZ shares; the second is measured.
    const RoundResult setup = session.run_round(eve.get());
    if (setup.verdict == Verdict::Aborted) {
      if (s.quantity == Quantity::Detection) return 1.0;
      return 0.0;
    }
  }
  const RoundResult r = session.run_round(eve.get());

  switch (s.quantity) {
    case Quantity::Acceptance:
      if (s.estimator == Estimator::Exact) return r.acceptance_probability;
      return r.verdict == Verdict::Accepted ? 1.0 : 0.0;
    case Quantity::Pass:
    case Quantity::Detection:
      return per_challenge(r, s);
    case Quantity::KeyFidelity: {
      if (eve) {
        const auto& rec = eve->state().accumulated_key;
        return rec.empty() ? 0.0 : rec.front().fidelity;
      }
      double worst = 1.0;
      for (int i = 1; i <= session.alice_key().pair_count(); ++i) {
        const PureState phi =
            bell_phi_plus(key_qubit(Party::Alice, i), key_qubit(Party::Bob, i));
        worst = std::min(worst, fidelity(phi, session.pair_state(i)));
      }
      return worst;
    }
  }
  return 0.0;
}

Estimate run(const Scenario& scenario, std::uint64_t seed, unsigned threads) {
  validate(scenario);
  const Scenario s = resolve(scenario);
  const auto n = static_cast<std::size_t>(s.trials);
  std::vector<double> values(n);

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t t = w; t < n; t += workers) {
        Rng rng = Rng::stream(seed, t);
        values[t] = run_trial(s, rng);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);

  double se = 0.0;
  if (bernoulli(s)) {
    se = std::sqrt(std::max(0.0, mean * (1.0 - mean)) / static_cast<double>(n));
  } else if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }

  Estimate est;
  est.quantity = s.quantity;
  est.mean = mean;
  est.standard_error = se;
  est.ci_low = mean - 1.96 * se;
  est.ci_high = mean + 1.96 * se;
  est.trials = s.trials;
  est.oracle = oracle_for(s);
  if (est.oracle) {
    const double diff = mean - *est.oracle;
    if (se > kExactTol)
      est.z = diff / se;
    else if (std::abs(diff) <= kHermitianTol)
      est.z = 0.0;
  }
  return est;
}

std::vector<Estimate> sweep(const Scenario& scenario, std::span<const double> thetas,
                            std::uint64_t seed, unsigned threads) {
  std::vector<Estimate> out;
  out.reserve(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    Scenario s = scenario;
    s.session.theta_mode = ThetaMode::Fixed;
    s.session.fixed_theta = thetas[k];
    if (s.strategy) s.strategy->theta = thetas[k];
    Rng point = Rng::stream(seed, k);
    Estimate e = run(s, point(), threads);
    e.parameter = thetas[k];
    out.push_back(e);
  }
  return out;
}

std::vector<double> theta_grid(double lo, double hi, int points) {
  if (points < 1) throw ConfigError("grid needs at least one point");
  if (points == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) out[k] = lo + (hi - lo) * k / (points - 1);
  out.back() = hi;
  return out;
}

}  // namespace eprauth
