// The honest authentication protocol as an explicit state machine.
//
// Alice and Bob share 2K EPR pairs (A_i, B_i), i = 1..2K. A round rotates
// every pair bilaterally by its secret angle theta_i, then Bob verifies Alice
// on the odd pairs 1, 3, ..., 2K'-1 and Alice verifies Bob on the even pairs
// 2, 4, ..., 2K'. Each challenge travels verifier -> identifier -> verifier
// through a Channel whose Interceptor hooks model an active eavesdropper.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eprauth/joint_state.hpp"
#include "eprauth/quantum.hpp"
#include "eprauth/rng.hpp"

namespace eprauth {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ThetaMode : std::uint8_t { PerPairRandom, Fixed };

/// Distribution of the verifier's secret challenge state.
enum class ChallengeEnsemble : std::uint8_t {
  Haar,           ///< uniform on the Bloch sphere (default)
  RealAmplitude,  ///< cos(t)|0> + sin(t)|1>, t uniform on [0, 2pi)
};

enum class Direction : std::uint8_t { BobVerifiesAlice, AliceVerifiesBob };

std::string to_string(ThetaMode m);
std::string to_string(ChallengeEnsemble e);
std::string to_string(Direction d);

struct SessionConfig {
  int K = 1;        ///< pairs per direction; 2K pairs in total
  int K_prime = 1;  ///< challenges per direction, 1 <= K' <= K
  ThetaMode theta_mode = ThetaMode::PerPairRandom;
  double fixed_theta = 0.0;
  std::uint64_t seed = 0;
  ChallengeEnsemble challenge_ensemble = ChallengeEnsemble::Haar;
};

void validate(const SessionConfig& config);

/// Names the holder's qubit of pair `index` and its partner.
struct EprHandle {
  int index = 0;
  QubitLabel own;
  QubitLabel partner;
};

QubitLabel key_qubit(Party owner, int pair_index);

/// Odd pairs are used when Bob verifies Alice, even pairs the other way round.
Direction direction_of(int pair_index);
Party identifier_of(int pair_index);
Party verifier_of(int pair_index);

/// One party's half of the shared key plus the shared secret angles.
///
/// Angle reads are counted so tests can check that no adversary policy ever
/// looks at them.
class AuthKey {
 public:
  AuthKey(Party owner, std::vector<EprHandle> pairs, std::vector<double> thetas);

  Party owner() const { return owner_; }
  int pair_count() const { return static_cast<int>(pairs_.size()); }
  /// 1-based pair index.
  const EprHandle& pair(int index) const;
  double theta(int index) const;
  std::uint64_t theta_reads() const { return theta_reads_; }

  int sessions_used() const { return sessions_used_; }
  void mark_session_completed() { ++sessions_used_; }
  bool valid() const { return valid_; }
  void discard() { valid_ = false; }

 private:
  Party owner_;
  std::vector<EprHandle> pairs_;
  std::vector<double> thetas_;
  mutable std::uint64_t theta_reads_ = 0;
  int sessions_used_ = 0;
  bool valid_ = true;
};

struct Challenge {
  int index = 0;
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  Qubit state() const { return {a, b}; }
  QubitLabel label() const { return {Party::Challenge, static_cast<std::uint32_t>(index)}; }
};

struct KeySetup {
  AuthKey alice;
  AuthKey bob;
  JointState state;
};

/// 2K pairs in |Phi+> over (A_i, B_i); angles uniform on [0, 2pi) or fixed.
KeySetup setup_keys(const SessionConfig& config, Rng& rng);

/// R(theta_i) on A_i and B_i. Leaves an honest |Phi+> pair unchanged.
JointState bilateral_rotate(JointState state, int pair_index, const AuthKey& alice,
                            const AuthKey& bob);

Challenge make_challenge(Rng& rng, int index,
                         ChallengeEnsemble ensemble = ChallengeEnsemble::Haar);

/// A finite challenge set whose uniform average equals the ensemble average
/// for every function of degree <= 2 in (psi, psi*): the six octahedron
/// states for Haar, twelve equally spaced real states otherwise.
std::vector<Challenge> challenge_design(ChallengeEnsemble ensemble, int index = 1);

/// Identifier's C-NOT: its key qubit of pair `pair_index` controls the challenge.
JointState identifier_encode(JointState state, int pair_index, const QubitLabel& challenge_qubit);

struct Verification {
  Outcome outcome;
  double prob_pass;
  JointState state;  ///< post-measurement, returned qubit traced out
};

/// Verifier's C-NOT (its key qubit controls the returned qubit), then a
/// projective test of the returned qubit against the challenge state.
Verification verifier_decode_and_test(JointState state, int pair_index, const Challenge& challenge,
                                      const QubitLabel& returned, double uniform01);
Verification verifier_decode_and_test(JointState state, int pair_index, const Challenge& challenge,
                                      double uniform01);

/// A qubit on the quantum channel. The eavesdropper may swap the label in
/// flight, or keep the qubit and answer herself (`delivered = false`).
struct Transit {
  Direction direction;
  int pair_index;
  QubitLabel qubit;
  bool delivered = true;
};

class Interceptor {
 public:
  virtual ~Interceptor() = default;

  /// False when Alice is absent and someone else claims her identity.
  virtual bool alice_present() const { return true; }
  virtual void on_forward(Transit& transit, JointState& state, Rng& rng);
  virtual void on_return(Transit& transit, JointState& state, Rng& rng);
  /// Additional return requests sent to the identifier in this direction.
  virtual int extra_return_requests(Direction direction) const;
};

/// Public classical record of the quantum channel.
class Channel {
 public:
  explicit Channel(Interceptor* eve) : eve_(eve) {}

  void forward(Transit& transit, JointState& state, Rng& rng);
  void send_back(Transit& transit, JointState& state, Rng& rng);
  const std::vector<int>& announced_indices() const { return announced_; }

 private:
  Interceptor* eve_;
  std::vector<int> announced_;
};

enum class Verdict : std::uint8_t { Accepted, Aborted };
enum class AbortReason : std::uint8_t { None, MeasurementFailed, ExcessReturnRequests };

std::string to_string(Verdict v);
std::string to_string(AbortReason r);

struct ChallengeRecord {
  Direction direction;
  int pair_index;
  Complex a;
  Complex b;
  double prob_pass;
  Outcome outcome;
};

struct RoundResult {
  int session_number = 0;
  std::vector<ChallengeRecord> challenges;  ///< issued up to (and including) an abort
  Verdict verdict = Verdict::Accepted;
  AbortReason abort_reason = AbortReason::None;
  bool keys_retained = true;
  std::vector<int> discarded_pairs;
  std::vector<int> announced_indices;
  /// Product of pass probabilities over every challenge on the pass branch.
  double acceptance_probability = 1.0;
  std::vector<int> return_requests;  ///< {to Alice, to Bob}
};

/// Holds the keys and the physical register across consecutive rounds.
class AuthSession {
 public:
  explicit AuthSession(const SessionConfig& config);

  /// Runs one authentication round. Throws std::logic_error once keys were
  /// discarded.
  RoundResult run_round(Interceptor* eve = nullptr);

  const SessionConfig& config() const { return config_; }
  const AuthKey& alice_key() const { return keys_.alice; }
  const AuthKey& bob_key() const { return keys_.bob; }
  const JointState& state() const { return keys_.state; }
  int rounds_run() const { return rounds_; }

  /// Reduced state of key pair `index` on (A_i, B_i).
  MixedState pair_state(int index) const;

 private:
  SessionConfig config_;
  Rng rng_;
  KeySetup keys_;
  int rounds_ = 0;
};

/// Fresh keys plus one round.
RoundResult run_session(const SessionConfig& config, Interceptor* eve = nullptr);

}  // namespace eprauth
