// Eavesdropper strategies against the EPR authentication protocol.
//
// Every strategy is an immutable EveStrategy value. An Eavesdropper pairs it
// with the mutable EveState of one attack campaign and plugs into the
// protocol as a channel Interceptor. Eve never sees an AuthKey; where a
// strategy "knows" the rotation angle, it is passed in explicitly.
//
// The standalone functions below evaluate single strategy steps by direct
// state evolution through the protocol's own steps.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eprauth/protocol.hpp"

namespace eprauth {

enum class StrategyKind : std::uint8_t {
  RandomImpersonation,
  InterceptForward,       // (I)
  InterceptReturn,        // (II)
  GhzInject,              // (III)
  QuarterPiKeySteal,
  FixedAngleImpersonate,
  FixedAngleKeySteal,
};

std::string to_string(StrategyKind k);
std::optional<StrategyKind> parse_strategy_kind(std::string_view name);

/// Strategies that first plant a GHZ share and exploit it in a later round.
bool uses_ghz_share(StrategyKind k);

struct ResponseComponent {
  double probability = 1.0;
  Qubit state;
};
using ResponseEnsemble = std::vector<ResponseComponent>;

struct ForwardTamper {
  enum class Mode : std::uint8_t { Unitary, Measurement };
  Mode mode = Mode::Unitary;
  Matrix2 unitary = Matrix2::Identity();
  /// Measurement basis; the collapsed qubit is forwarded.
  Qubit basis;
};

struct EveStrategy {
  StrategyKind kind = StrategyKind::RandomImpersonation;
  /// RandomImpersonation response. Empty: Eve draws a fresh two-state
  /// ensemble for every challenge.
  ResponseEnsemble ensemble;
  ForwardTamper forward_tamper;
  /// InterceptReturn joint unitary on (returned qubit, Eve's |0> ancilla).
  Matrix4 return_unitary = Matrix4::Identity();
  double theta = 0.0;  ///< rotation angle Eve assumes (fixed-angle kinds)
  double phi1 = 0.0;   ///< FixedAngleKeySteal pre-send rotation
  double phi2 = 0.0;   ///< FixedAngleKeySteal post-return rotation
  /// Attacked pair indices; empty means every Bob-verifies-Alice pair.
  std::vector<int> target_pairs;
  int extra_return_requests = 0;
};

void validate(const EveStrategy& strategy);

/// Two Haar-random states with weights p, 1 - p, p uniform.
ResponseEnsemble random_response_ensemble(Rng& rng);

struct KeyRecord {
  int pair_index = 0;
  double fidelity = 0.0;  ///< Eve's reduced (verifier key, Eve) state vs |Phi+>
};

struct EveState {
  Labels eve_qubits;
  std::vector<KeyRecord> accumulated_key;
  std::map<int, QubitLabel> ghz_shares;  ///< pair index -> Eve's entangled qubit
  std::uint32_t next_label = 0;
};

class Eavesdropper : public Interceptor {
 public:
  explicit Eavesdropper(EveStrategy strategy);

  const EveStrategy& strategy() const { return strategy_; }
  const EveState& state() const { return state_; }
  bool targets(int pair_index) const;

  bool alice_present() const override;
  void on_forward(Transit& transit, JointState& state, Rng& rng) override;
  void on_return(Transit& transit, JointState& state, Rng& rng) override;
  int extra_return_requests(Direction direction) const override;

 private:
  QubitLabel fresh_qubit();
  void record_key(int pair_index, const QubitLabel& eve_qubit, const JointState& state);

  EveStrategy strategy_;
  EveState state_;
  std::map<int, QubitLabel> held_challenge_;
};

// ---------------------------------------------------------------------------
// Standalone strategy steps

/// rho = sum_k p_k |psi'_k><psi'_k| on `out`. Throws on a malformed ensemble.
MixedState random_impersonation_respond(const ResponseEnsemble& ensemble, const QubitLabel& out);

/// Bob's pass probability when Eve answers `challenge` with the ensemble,
/// holding no key. Alice is absent, so only Bob rotates by `key_theta`.
double impersonation_pass_probability(const Challenge& challenge, const ResponseEnsemble& ensemble,
                                      double key_theta = 0.0);

/// Strategy (I): tamper with the challenge before the identifier's C-NOT.
double intercept_forward_detection(const Challenge& challenge, const ForwardTamper& tamper,
                                   double key_theta = 0.0);

struct InterceptReturnOutcome {
  double detection = 0.0;
  double eve_fidelity = 0.0;  ///< (B, E) vs |Phi+> when Eve forwards the qubit
};

/// Strategy (II): joint unitary on (returned qubit, Eve ancilla |0>).
InterceptReturnOutcome intercept_return_entangle(const Challenge& challenge, const Matrix4& unitary,
                                                 double key_theta = 0.0);

/// Strategy (III) setup: Eve's |0> qubit replaces the challenge of pair
/// `pair_index` and the identifier's C-NOT entangles it into a GHZ state.
JointState ghz_inject(JointState state, int pair_index, const QubitLabel& eve_qubit);

/// Labels of the three-qubit register used by the GHZ helpers below.
inline constexpr QubitLabel kGhzAlice{Party::Alice, 1};
inline constexpr QubitLabel kGhzBob{Party::Bob, 1};
inline constexpr QubitLabel kGhzEve{Party::Eve, 0};

/// (A, B, E) after injection and a bilateral rotation by theta.
PureState ghz_rotated(double theta);

/// Bob's pass probability when Eve answers with her GHZ share after a
/// bilateral rotation by theta. `flip_first` applies NOT to her qubit first.
double ghz_exploit_pass_probability(double theta, const Challenge& challenge, bool flip_first);

struct KeyStealOutcome {
  PureState final_state;        ///< (A, B, E)
  double eve_fidelity = 0.0;    ///< tr_A vs |Phi+> on (B, E)
  double bob_pass_probability;  ///< Bob's test when Eve answers with her share
  bool precondition_met = false;
};

/// Eve mirrors a pi/4 rotation on her share and routes it through Alice's
/// C-NOT. The postcondition holds only when the key angle is pi/4 (mod pi);
/// at 3pi/4 her pair lands in a Bell state orthogonal to Phi+.
KeyStealOutcome quarter_pi_key_steal(double key_theta, const Challenge& challenge);

/// Eve's branch for a known fixed angle: NOT first iff sin^2 > cos^2.
bool fixed_angle_uses_not(double theta);

/// Exact pass probability of the better branch for one challenge.
double fixed_angle_impersonate_pass(double theta, const Challenge& challenge);

/// One sampled impersonation attempt with a challenge drawn from `ensemble`.
Outcome sample_fixed_angle_impersonate(double theta, Rng& rng,
                                       ChallengeEnsemble ensemble = ChallengeEnsemble::Haar);

/// Eve's (B, E) fidelity with |Phi+> after R(phi1), Alice's C-NOT, R(phi2).
double fixed_angle_key_steal(double theta, double phi1, double phi2);

struct KeyStealOptimum {
  double fidelity = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// 360 x 360 grid over [0, pi)^2 followed by pattern-search refinement.
KeyStealOptimum maximize_key_steal(double theta, int grid = 360);

}  // namespace eprauth
