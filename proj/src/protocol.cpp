#include "eprauth/protocol.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace eprauth {

std::string to_string(ThetaMode m) {
  return m == ThetaMode::Fixed ? "fixed" : "random";
}

std::string to_string(ChallengeEnsemble e) {
  return e == ChallengeEnsemble::RealAmplitude ? "real" : "haar";
}

std::string to_string(Direction d) {
  return d == Direction::BobVerifiesAlice ? "bob_verifies_alice" : "alice_verifies_bob";
}

std::string to_string(Verdict v) { return v == Verdict::Accepted ? "accepted" : "aborted"; }

std::string to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::MeasurementFailed: return "measurement_failed";
    case AbortReason::ExcessReturnRequests: return "excess_return_requests";
  }
  return "unknown";
}

void validate(const SessionConfig& config) {
  if (config.K < 1) throw ConfigError("K must be at least 1");
  if (config.K > 64) throw ConfigError("K is limited to 64 pairs per direction");
  if (config.K_prime < 1 || config.K_prime > config.K)
    throw ConfigError("K_prime must satisfy 1 <= K_prime <= K");
  if (config.theta_mode == ThetaMode::Fixed && !std::isfinite(config.fixed_theta))
    throw ConfigError("fixed theta must be finite");
}

QubitLabel key_qubit(Party owner, int pair_index) {
  return {owner, static_cast<std::uint32_t>(pair_index)};
}

Direction direction_of(int pair_index) {
  return pair_index % 2 == 1 ? Direction::BobVerifiesAlice : Direction::AliceVerifiesBob;
}

Party identifier_of(int pair_index) {
  return direction_of(pair_index) == Direction::BobVerifiesAlice ? Party::Alice : Party::Bob;
}

Party verifier_of(int pair_index) {
  return direction_of(pair_index) == Direction::BobVerifiesAlice ? Party::Bob : Party::Alice;
}

// ---------------------------------------------------------------------------
// AuthKey

AuthKey::AuthKey(Party owner, std::vector<EprHandle> pairs, std::vector<double> thetas)
    : owner_(owner), pairs_(std::move(pairs)), thetas_(std::move(thetas)) {
  if (pairs_.size() != thetas_.size()) throw ConfigError("one angle per key pair is required");
  if (pairs_.empty() || pairs_.size() % 2 != 0) throw ConfigError("a key holds 2K pairs");
}

const EprHandle& AuthKey::pair(int index) const {
  if (index < 1 || index > pair_count()) throw std::out_of_range("pair index out of range");
  return pairs_[static_cast<std::size_t>(index - 1)];
}

double AuthKey::theta(int index) const {
  if (index < 1 || index > pair_count()) throw std::out_of_range("pair index out of range");
  ++theta_reads_;
  return thetas_[static_cast<std::size_t>(index - 1)];
}

// ---------------------------------------------------------------------------
// Protocol steps

KeySetup setup_keys(const SessionConfig& config, Rng& rng) {
  validate(config);
  const int n = 2 * config.K;
  std::vector<EprHandle> alice_pairs;
  std::vector<EprHandle> bob_pairs;
  std::vector<double> thetas;
  JointState state;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int i = 1; i <= n; ++i) {
    const QubitLabel a = key_qubit(Party::Alice, i);
    const QubitLabel b = key_qubit(Party::Bob, i);
    alice_pairs.push_back({i, a, b});
    bob_pairs.push_back({i, b, a});
    state.add(bell_phi_plus(a, b));
    thetas.push_back(config.theta_mode == ThetaMode::Fixed ? config.fixed_theta : angle(rng));
  }
  return {AuthKey(Party::Alice, std::move(alice_pairs), thetas),
          AuthKey(Party::Bob, std::move(bob_pairs), thetas), std::move(state)};
}

JointState bilateral_rotate(JointState state, int pair_index, const AuthKey& alice,
                            const AuthKey& bob) {
  state.rotate(alice.pair(pair_index).own, alice.theta(pair_index));
  state.rotate(bob.pair(pair_index).own, bob.theta(pair_index));
  return state;
}

Challenge make_challenge(Rng& rng, int index, ChallengeEnsemble ensemble) {
  if (ensemble == ChallengeEnsemble::RealAmplitude) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double t = angle(rng);
    return {index, {std::cos(t), 0.0}, {std::sin(t), 0.0}};
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Complex a;
  Complex b;
  double norm = 0.0;
  do {
    a = {gauss(rng), gauss(rng)};
    b = {gauss(rng), gauss(rng)};
    norm = std::sqrt(std::norm(a) + std::norm(b));
  } while (norm < 1e-300);
  return {index, a / norm, b / norm};
}

std::vector<Challenge> challenge_design(ChallengeEnsemble ensemble, int index) {
  std::vector<Challenge> out;
  if (ensemble == ChallengeEnsemble::RealAmplitude) {
    constexpr int kPoints = 12;
    for (int k = 0; k < kPoints; ++k) {
      const double t = 2.0 * std::numbers::pi * k / kPoints;
      out.push_back({index, {std::cos(t), 0.0}, {std::sin(t), 0.0}});
    }
    return out;
  }
  const double r = 1.0 / std::numbers::sqrt2;
  out.push_back({index, {1.0, 0.0}, {0.0, 0.0}});
  out.push_back({index, {0.0, 0.0}, {1.0, 0.0}});
  out.push_back({index, {r, 0.0}, {r, 0.0}});
  out.push_back({index, {r, 0.0}, {-r, 0.0}});
  out.push_back({index, {r, 0.0}, {0.0, r}});
  out.push_back({index, {r, 0.0}, {0.0, -r}});
  return out;
}

JointState identifier_encode(JointState state, int pair_index, const QubitLabel& challenge_qubit) {
  state.cnot(key_qubit(identifier_of(pair_index), pair_index), challenge_qubit);
  return state;
}

Verification verifier_decode_and_test(JointState state, int pair_index, const Challenge& challenge,
                                      const QubitLabel& returned, double uniform01) {
  state.cnot(key_qubit(verifier_of(pair_index), pair_index), returned);
  const double p = state.pass_probability(returned, challenge.state());
  const Outcome outcome = uniform01 < p ? Outcome::Pass : Outcome::Fail;
  state.project(returned, challenge.state(), outcome);
  state.discard(returned);
  return {outcome, p, std::move(state)};
}

Verification verifier_decode_and_test(JointState state, int pair_index, const Challenge& challenge,
                                      double uniform01) {
  return verifier_decode_and_test(std::move(state), pair_index, challenge, challenge.label(),
                                  uniform01);
}

// ---------------------------------------------------------------------------
// Channel

void Interceptor::on_forward(Transit&, JointState&, Rng&) {}
void Interceptor::on_return(Transit&, JointState&, Rng&) {}
int Interceptor::extra_return_requests(Direction) const { return 0; }

void Channel::forward(Transit& transit, JointState& state, Rng& rng) {
  announced_.push_back(transit.pair_index);
  if (eve_) eve_->on_forward(transit, state, rng);
}

void Channel::send_back(Transit& transit, JointState& state, Rng& rng) {
  if (eve_) eve_->on_return(transit, state, rng);
}

// ---------------------------------------------------------------------------
// Session

AuthSession::AuthSession(const SessionConfig& config)
    : config_(config), rng_(config.seed), keys_(setup_keys(config_, rng_)) {}

MixedState AuthSession::pair_state(int index) const {
  const Labels keep{key_qubit(Party::Alice, index), key_qubit(Party::Bob, index)};
  return keys_.state.reduced(keep);
}

RoundResult AuthSession::run_round(Interceptor* eve) {
  if (!keys_.alice.valid() || !keys_.bob.valid())
    throw std::logic_error("keys were discarded; start again with new EPR pairs");

  RoundResult result;
  result.session_number = ++rounds_;
  const bool alice_present = eve == nullptr || eve->alice_present();
  JointState& state = keys_.state;
  const int n = keys_.alice.pair_count();

  for (int i = 1; i <= n; ++i) {
    if (alice_present) state.rotate(keys_.alice.pair(i).own, keys_.alice.theta(i));
    state.rotate(keys_.bob.pair(i).own, keys_.bob.theta(i));
  }

  Channel channel(eve);
  int requests_to_alice = 0;
  int requests_to_bob = 0;
  std::vector<int> used;

  auto abort = [&](AbortReason reason) {
    if (result.verdict == Verdict::Aborted) return;
    result.verdict = Verdict::Aborted;
    result.abort_reason = reason;
    result.discarded_pairs = used;
  };

  for (Direction dir : {Direction::BobVerifiesAlice, Direction::AliceVerifiesBob}) {
    if (dir == Direction::AliceVerifiesBob && !alice_present) continue;
    const bool identifier_present = dir == Direction::AliceVerifiesBob || alice_present;
    int& requests = dir == Direction::BobVerifiesAlice ? requests_to_alice : requests_to_bob;

    for (int j = 0; j < config_.K_prime; ++j) {
      const int i = dir == Direction::BobVerifiesAlice ? 2 * j + 1 : 2 * j + 2;
      const Challenge challenge = make_challenge(rng_, i, config_.challenge_ensemble);
      state.add(single_qubit(challenge.label(), challenge.state()));
      if (result.verdict == Verdict::Accepted) used.push_back(i);

      Transit transit{dir, i, challenge.label(), true};
      channel.forward(transit, state, rng_);
      if (transit.delivered) {
        ++requests;
        if (identifier_present) state = identifier_encode(std::move(state), i, transit.qubit);
      }
      channel.send_back(transit, state, rng_);

      state.cnot(key_qubit(verifier_of(i), i), transit.qubit);
      const double p = state.pass_probability(transit.qubit, challenge.state());
      const Outcome outcome = rng_.uniform() < p ? Outcome::Pass : Outcome::Fail;
      if (result.verdict == Verdict::Accepted) {
        result.challenges.push_back({dir, i, challenge.a, challenge.b, p, outcome});
        if (outcome == Outcome::Fail) abort(AbortReason::MeasurementFailed);
      }
      result.acceptance_probability *= p;
      // Continue on the pass branch so the analytic acceptance covers every
      // challenge; after a sampled abort this state is only used for that.
      if (p > 0.0) state.project(transit.qubit, challenge.state(), Outcome::Pass);
      state.discard(transit.qubit);
      // A challenge qubit Eve kept back leaves with her at the end of the exchange.
      if (state.contains(challenge.label())) state.discard(challenge.label());
      if (p <= 0.0) break;
    }

    if (eve) requests += eve->extra_return_requests(dir);
    if (requests > config_.K_prime) {
      abort(AbortReason::ExcessReturnRequests);
      result.acceptance_probability = 0.0;
    }
    if (result.acceptance_probability <= 0.0) break;
  }

  result.announced_indices = channel.announced_indices();
  result.return_requests = {requests_to_alice, requests_to_bob};
  if (result.verdict == Verdict::Aborted) {
    result.keys_retained = false;
    keys_.alice.discard();
    keys_.bob.discard();
  } else {
    keys_.alice.mark_session_completed();
    keys_.bob.mark_session_completed();
  }
  return result;
}

RoundResult run_session(const SessionConfig& config, Interceptor* eve) {
  AuthSession session(config);
  return session.run_round(eve);
}

}  // namespace eprauth
