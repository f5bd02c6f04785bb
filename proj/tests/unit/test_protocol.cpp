#include <doctest.h>

#include <numbers>
#include <stdexcept>

#include "eprauth/adversary.hpp"
#include "eprauth/protocol.hpp"

using namespace eprauth;

namespace {

SessionConfig config(int K, int Kp, std::uint64_t seed = 1) {
  SessionConfig c;
  c.K = K;
  c.K_prime = Kp;
  c.seed = seed;
  return c;
}

class ExtraRequests : public Interceptor {
 public:
  int extra_return_requests(Direction d) const override {
    return d == Direction::AliceVerifiesBob ? 1 : 0;
  }
};

}  // namespace

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(validate(config(0, 1)), ConfigError);
  CHECK_THROWS_AS(validate(config(2, 0)), ConfigError);
  CHECK_THROWS_AS(validate(config(2, 3)), ConfigError);
  CHECK_NOTHROW(validate(config(3, 3)));
  CHECK_THROWS_AS(AuthSession(config(1, 2)), ConfigError);
}

TEST_CASE("pair roles alternate") {
  CHECK(direction_of(1) == Direction::BobVerifiesAlice);
  CHECK(direction_of(2) == Direction::AliceVerifiesBob);
  CHECK(identifier_of(3) == Party::Alice);
  CHECK(verifier_of(3) == Party::Bob);
  CHECK(identifier_of(4) == Party::Bob);
}

TEST_CASE("honest rounds always accept") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RoundResult r = run_session(config(4, 3, seed));
    CHECK(r.verdict == Verdict::Accepted);
    CHECK(r.keys_retained);
    CHECK(r.challenges.size() == 6);
    CHECK(std::abs(r.acceptance_probability - 1.0) < 1e-12);
    for (const auto& c : r.challenges) {
      CHECK(c.outcome == Outcome::Pass);
      CHECK(std::abs(c.prob_pass - 1.0) < 1e-12);
    }
    CHECK(r.announced_indices == std::vector<int>{1, 3, 5, 2, 4, 6});
    CHECK(r.return_requests == std::vector<int>{3, 3});
  }
}

TEST_CASE("honest pairs stay in Phi+ across rounds") {
  AuthSession s(config(2, 2, 5));
  for (int round = 0; round < 3; ++round) CHECK(s.run_round().verdict == Verdict::Accepted);
  CHECK(s.alice_key().sessions_used() == 3);
  for (int i = 1; i <= 4; ++i)
    CHECK(fidelity(bell_phi_plus(key_qubit(Party::Alice, i), key_qubit(Party::Bob, i)),
                   s.pair_state(i)) > 1.0 - 1e-12);
}

TEST_CASE("angles are read only by the key holders' rotations") {
  AuthSession s(config(3, 2, 8));
  s.run_round();
  CHECK(s.alice_key().theta_reads() == 6);
  CHECK(s.bob_key().theta_reads() == 6);

  AuthSession attacked(config(3, 2, 8));
  EveStrategy e;
  e.kind = StrategyKind::InterceptForward;
  Eavesdropper eve(e);
  attacked.run_round(&eve);
  CHECK(attacked.alice_key().theta_reads() == 6);
  CHECK(attacked.bob_key().theta_reads() == 6);
}

TEST_CASE("an abort discards the keys and blocks further rounds") {
  EveStrategy e;
  e.kind = StrategyKind::RandomImpersonation;
  bool saw_abort = false;
  for (std::uint64_t seed = 0; seed < 20 && !saw_abort; ++seed) {
    AuthSession s(config(3, 3, seed));
    Eavesdropper eve(e);
    const RoundResult r = s.run_round(&eve);
    if (r.verdict != Verdict::Aborted) continue;
    saw_abort = true;
    CHECK(r.abort_reason == AbortReason::MeasurementFailed);
    CHECK_FALSE(r.keys_retained);
    CHECK_FALSE(s.alice_key().valid());
    CHECK_FALSE(s.bob_key().valid());
    CHECK(r.challenges.back().outcome == Outcome::Fail);
    CHECK(r.discarded_pairs.size() == r.challenges.size());
    CHECK_THROWS_AS(s.run_round(), std::logic_error);
  }
  CHECK(saw_abort);
}

TEST_CASE("too many return requests abort the round") {
  AuthSession s(config(2, 2, 3));
  ExtraRequests extra;
  const RoundResult r = s.run_round(&extra);
  CHECK(r.verdict == Verdict::Aborted);
  CHECK(r.abort_reason == AbortReason::ExcessReturnRequests);
  CHECK(r.acceptance_probability == 0.0);
  CHECK(r.return_requests == std::vector<int>{2, 3});
}

TEST_CASE("same seed, same transcript") {
  const RoundResult a = run_session(config(3, 2, 77));
  const RoundResult b = run_session(config(3, 2, 77));
  const RoundResult c = run_session(config(3, 2, 78));
  REQUIRE(a.challenges.size() == b.challenges.size());
  for (std::size_t k = 0; k < a.challenges.size(); ++k) {
    CHECK(a.challenges[k].a == b.challenges[k].a);
    CHECK(a.challenges[k].b == b.challenges[k].b);
  }
  CHECK(a.challenges[0].a != c.challenges[0].a);
}

TEST_CASE("fixed theta mode uses the given angle everywhere") {
  SessionConfig c = config(2, 1);
  c.theta_mode = ThetaMode::Fixed;
  c.fixed_theta = 0.3;
  Rng rng(1);
  const KeySetup k = setup_keys(c, rng);
  for (int i = 1; i <= 4; ++i) CHECK(k.alice.theta(i) == 0.3);
  CHECK_THROWS_AS((void)k.alice.theta(5), std::out_of_range);
}

TEST_CASE("challenge design reproduces the ensemble moments") {
  double a4 = 0.0;
  double a2b2 = 0.0;
  double a2 = 0.0;
  const auto haar = challenge_design(ChallengeEnsemble::Haar);
  CHECK(haar.size() == 6);
  for (const auto& c : haar) {
    CHECK(std::abs(std::norm(c.a) + std::norm(c.b) - 1.0) < 1e-15);
    a4 += std::norm(c.a) * std::norm(c.a);
    a2b2 += std::norm(c.a) * std::norm(c.b);
    a2 += std::norm(c.a);
  }
  const double n = static_cast<double>(haar.size());
  CHECK(std::abs(a4 / n - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(a2b2 / n - 1.0 / 6.0) < 1e-15);
  CHECK(std::abs(a2 / n - 0.5) < 1e-15);

  const auto real = challenge_design(ChallengeEnsemble::RealAmplitude);
  double c4 = 0.0;
  double cs = 0.0;
  for (const auto& c : real) {
    CHECK(c.a.imag() == 0.0);
    c4 += std::pow(c.a.real(), 4);
    cs += std::pow(c.a.real() * c.b.real(), 2);
  }
  CHECK(std::abs(c4 / real.size() - 3.0 / 8.0) < 1e-15);
  CHECK(std::abs(cs / real.size() - 1.0 / 8.0) < 1e-15);
}

TEST_CASE("sampled challenges match the design moments") {
  Rng rng(99);
  const int n = 200000;
  double a4 = 0.0;
  double c4 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Challenge h = make_challenge(rng, 1);
    a4 += std::norm(h.a) * std::norm(h.a);
    const Challenge r = make_challenge(rng, 1, ChallengeEnsemble::RealAmplitude);
    c4 += std::pow(r.a.real(), 4);
  }
  // sd 0.298 (|a|^4) and 0.364 (cos^4): 5 sigma at n = 2e5 is 0.0034 and 0.0041
  CHECK(std::abs(a4 / n - 1.0 / 3.0) < 0.0034);
  CHECK(std::abs(c4 / n - 3.0 / 8.0) < 0.0041);
}

TEST_CASE("verifier decode passes the honest identifier's answer") {
  const SessionConfig c = config(1, 1);
  Rng rng(4);
  KeySetup k = setup_keys(c, rng);
  JointState st = bilateral_rotate(std::move(k.state), 1, k.alice, k.bob);
  const Challenge ch = make_challenge(rng, 1);
  st.add(single_qubit(ch.label(), ch.state()));
  st = identifier_encode(std::move(st), 1, ch.label());
  const Verification v = verifier_decode_and_test(std::move(st), 1, ch, 0.999);
  CHECK(v.outcome == Outcome::Pass);
  CHECK(std::abs(v.prob_pass - 1.0) < 1e-12);
  CHECK_FALSE(v.state.contains(ch.label()));
}
