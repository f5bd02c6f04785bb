#include "eprauth/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace eprauth {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;

bool is_unitary(const Matrix2& u) {
  return (u.adjoint() * u - Matrix2::Identity()).cwiseAbs().maxCoeff() < kHermitianTol;
}

bool is_unitary(const Matrix4& u) {
  return (u.adjoint() * u - Matrix4::Identity()).cwiseAbs().maxCoeff() < kHermitianTol;
}

Matrix2 projector(const Qubit& q) {
  Eigen::Vector2cd v(q.a, q.b);
  return v * v.adjoint();
}

double eve_pair_fidelity(const JointState& state, const QubitLabel& key, const QubitLabel& eve) {
  const Labels keep{key, eve};
  return fidelity(bell_phi_plus(key, eve), state.reduced(keep));
}

}  // namespace

std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::RandomImpersonation: return "random_impersonation";
    case StrategyKind::InterceptForward: return "intercept_forward";
    case StrategyKind::InterceptReturn: return "intercept_return";
    case StrategyKind::GhzInject: return "ghz_inject";
    case StrategyKind::QuarterPiKeySteal: return "quarter_pi_key_steal";
    case StrategyKind::FixedAngleImpersonate: return "fixed_angle_impersonate";
    case StrategyKind::FixedAngleKeySteal: return "fixed_angle_key_steal";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view name) {
  for (auto k : {StrategyKind::RandomImpersonation, StrategyKind::InterceptForward,
                 StrategyKind::InterceptReturn, StrategyKind::GhzInject,
                 StrategyKind::QuarterPiKeySteal, StrategyKind::FixedAngleImpersonate,
                 StrategyKind::FixedAngleKeySteal}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool uses_ghz_share(StrategyKind k) {
  return k == StrategyKind::GhzInject || k == StrategyKind::QuarterPiKeySteal ||
         k == StrategyKind::FixedAngleImpersonate || k == StrategyKind::FixedAngleKeySteal;
}

ResponseEnsemble random_response_ensemble(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = unit(rng);
  const Challenge first = make_challenge(rng, 0);
  const Challenge second = make_challenge(rng, 0);
  return {{p, first.state()}, {1.0 - p, second.state()}};
}

void validate(const EveStrategy& s) {
  if (!s.ensemble.empty()) {
    double total = 0.0;
    for (const auto& c : s.ensemble) {
      if (!(c.probability >= 0.0)) throw ConfigError("ensemble probabilities must be >= 0");
      if (std::abs(c.state.norm_squared() - 1.0) > kExactTol)
        throw ConfigError("ensemble states must be normalized");
      total += c.probability;
    }
    if (std::abs(total - 1.0) > kExactTol) throw ConfigError("ensemble probabilities must sum to 1");
  }
  if (s.forward_tamper.mode == ForwardTamper::Mode::Unitary && !is_unitary(s.forward_tamper.unitary))
    throw ConfigError("forward tamper must be unitary");
  if (s.forward_tamper.mode == ForwardTamper::Mode::Measurement &&
      std::abs(s.forward_tamper.basis.norm_squared() - 1.0) > kExactTol)
    throw ConfigError("tamper measurement basis must be normalized");
  if (!is_unitary(s.return_unitary)) throw ConfigError("return unitary must be unitary");
  if (!std::isfinite(s.theta) || !std::isfinite(s.phi1) || !std::isfinite(s.phi2))
    throw ConfigError("strategy angles must be finite");
  for (int i : s.target_pairs)
    if (i < 1) throw ConfigError("target pair indices are 1-based");
  if (s.extra_return_requests < 0) throw ConfigError("extra_return_requests must be >= 0");
}

// ---------------------------------------------------------------------------
// Eavesdropper

Eavesdropper::Eavesdropper(EveStrategy strategy) : strategy_(std::move(strategy)) {
  validate(strategy_);
}

bool Eavesdropper::targets(int pair_index) const {
  if (strategy_.target_pairs.empty()) return direction_of(pair_index) == Direction::BobVerifiesAlice;
  return std::find(strategy_.target_pairs.begin(), strategy_.target_pairs.end(), pair_index) !=
         strategy_.target_pairs.end();
}

bool Eavesdropper::alice_present() const {
  switch (strategy_.kind) {
    case StrategyKind::RandomImpersonation: return false;
    case StrategyKind::FixedAngleImpersonate: return state_.ghz_shares.empty();
    default: return true;
  }
}

int Eavesdropper::extra_return_requests(Direction direction) const {
  return direction == Direction::BobVerifiesAlice ? strategy_.extra_return_requests : 0;
}

QubitLabel Eavesdropper::fresh_qubit() {
  const QubitLabel q{Party::Eve, state_.next_label++};
  state_.eve_qubits.push_back(q);
  return q;
}

void Eavesdropper::record_key(int pair_index, const QubitLabel& eve_qubit, const JointState& state) {
  const QubitLabel verifier_key = key_qubit(verifier_of(pair_index), pair_index);
  state_.accumulated_key.push_back(
      {pair_index, eve_pair_fidelity(state, verifier_key, eve_qubit)});
}

void Eavesdropper::on_forward(Transit& transit, JointState& state, Rng&) {
  const int i = transit.pair_index;
  if (!targets(i)) return;

  switch (strategy_.kind) {
    case StrategyKind::RandomImpersonation:
      transit.delivered = false;
      return;
    case StrategyKind::InterceptForward: {
      const auto& t = strategy_.forward_tamper;
      if (t.mode == ForwardTamper::Mode::Unitary) {
        state.apply_single(transit.qubit, t.unitary);
      } else {
        const Matrix2 kraus[2] = {projector(t.basis), projector(t.basis.orthogonal())};
        state.apply_channel(transit.qubit, kraus);
      }
      return;
    }
    case StrategyKind::InterceptReturn:
      return;
    default:
      break;
  }

  // GHZ family.
  held_challenge_[i] = transit.qubit;
  auto share = state_.ghz_shares.find(i);
  if (share == state_.ghz_shares.end()) {
    const QubitLabel e = fresh_qubit();
    state.add(single_qubit(e, Qubit{}));
    transit.qubit = e;
    return;
  }
  const QubitLabel e = share->second;
  switch (strategy_.kind) {
    case StrategyKind::GhzInject:
    case StrategyKind::FixedAngleImpersonate:
      transit.delivered = false;
      break;
    case StrategyKind::QuarterPiKeySteal:
      state.rotate(e, kQuarterPi);
      transit.qubit = e;
      break;
    case StrategyKind::FixedAngleKeySteal:
      state.rotate(e, strategy_.phi1);
      transit.qubit = e;
      break;
    default:
      break;
  }
}

void Eavesdropper::on_return(Transit& transit, JointState& state, Rng& rng) {
  const int i = transit.pair_index;
  if (!targets(i)) return;

  switch (strategy_.kind) {
    case StrategyKind::RandomImpersonation: {
      const ResponseEnsemble ensemble =
          strategy_.ensemble.empty() ? random_response_ensemble(rng) : strategy_.ensemble;
      const QubitLabel out = fresh_qubit();
      state.add(random_impersonation_respond(ensemble, out));
      transit.qubit = out;
      return;
    }
    case StrategyKind::InterceptForward:
      return;
    case StrategyKind::InterceptReturn: {
      const QubitLabel ancilla = fresh_qubit();
      state.add(single_qubit(ancilla, Qubit{}));
      state.apply_two(transit.qubit, ancilla, strategy_.return_unitary);
      record_key(i, ancilla, state);
      return;
    }
    default:
      break;
  }

  const QubitLabel challenge = held_challenge_.at(i);
  held_challenge_.erase(i);
  auto share = state_.ghz_shares.find(i);
  if (share == state_.ghz_shares.end()) {
    // Injection round: the identifier's C-NOT made Eve's qubit a GHZ share,
    // which then answers the real challenge exactly as the key would.
    const QubitLabel e = transit.qubit;
    state_.ghz_shares.emplace(i, e);
    state.cnot(e, challenge);
    transit.qubit = challenge;
    return;
  }

  const QubitLabel e = share->second;
  switch (strategy_.kind) {
    case StrategyKind::FixedAngleImpersonate:
      if (fixed_angle_uses_not(strategy_.theta)) state.apply_not(e);
      break;
    case StrategyKind::QuarterPiKeySteal:
      record_key(i, e, state);
      break;
    case StrategyKind::FixedAngleKeySteal:
      state.rotate(e, strategy_.phi2);
      record_key(i, e, state);
      break;
    default:
      break;
  }
  state.cnot(e, challenge);
  transit.qubit = challenge;
}

// ---------------------------------------------------------------------------
// Standalone steps

MixedState random_impersonation_respond(const ResponseEnsemble& ensemble, const QubitLabel& out) {
  if (ensemble.empty()) throw ConfigError("response ensemble is empty");
  EveStrategy probe;
  probe.ensemble = ensemble;
  validate(probe);
  Matrix rho = Matrix::Zero(2, 2);
  for (const auto& c : ensemble) rho += c.probability * projector(c.state);
  return MixedState::make({out}, rho);
}

double impersonation_pass_probability(const Challenge& challenge, const ResponseEnsemble& ensemble,
                                      double key_theta) {
  const QubitLabel a = key_qubit(Party::Alice, 1);
  const QubitLabel b = key_qubit(Party::Bob, 1);
  const QubitLabel response{Party::Eve, 0};
  JointState s;
  s.add(bell_phi_plus(a, b));
  s.rotate(b, key_theta);
  s.add(random_impersonation_respond(ensemble, response));
  return verifier_decode_and_test(std::move(s), 1, {1, challenge.a, challenge.b}, response, 0.0)
      .prob_pass;
}

namespace {

JointState honest_pair(double key_theta) {
  const QubitLabel a = key_qubit(Party::Alice, 1);
  const QubitLabel b = key_qubit(Party::Bob, 1);
  JointState s;
  s.add(bell_phi_plus(a, b));
  s.rotate(a, key_theta);
  s.rotate(b, key_theta);
  return s;
}

}  // namespace

double intercept_forward_detection(const Challenge& challenge, const ForwardTamper& tamper,
                                   double key_theta) {
  const Challenge c{1, challenge.a, challenge.b};
  EveStrategy probe;
  probe.kind = StrategyKind::InterceptForward;
  probe.forward_tamper = tamper;
  validate(probe);

  JointState s = honest_pair(key_theta);
  s.add(single_qubit(c.label(), c.state()));
  if (tamper.mode == ForwardTamper::Mode::Unitary) {
    s.apply_single(c.label(), tamper.unitary);
  } else {
    const Matrix2 kraus[2] = {projector(tamper.basis), projector(tamper.basis.orthogonal())};
    s.apply_channel(c.label(), kraus);
  }
  s = identifier_encode(std::move(s), 1, c.label());
  return 1.0 - verifier_decode_and_test(std::move(s), 1, c, 0.0).prob_pass;
}

InterceptReturnOutcome intercept_return_entangle(const Challenge& challenge, const Matrix4& unitary,
                                                 double key_theta) {
  if (!is_unitary(unitary)) throw ConfigError("return unitary must be unitary");
  const Challenge c{1, challenge.a, challenge.b};
  const QubitLabel ancilla{Party::Eve, 0};
  JointState s = honest_pair(key_theta);
  s.add(single_qubit(c.label(), c.state()));
  s = identifier_encode(std::move(s), 1, c.label());
  s.add(single_qubit(ancilla, Qubit{}));
  s.apply_two(c.label(), ancilla, unitary);
  InterceptReturnOutcome out;
  out.eve_fidelity = eve_pair_fidelity(s, key_qubit(Party::Bob, 1), ancilla);
  out.detection = 1.0 - verifier_decode_and_test(std::move(s), 1, c, 0.0).prob_pass;
  return out;
}

JointState ghz_inject(JointState state, int pair_index, const QubitLabel& eve_qubit) {
  state.add(single_qubit(eve_qubit, Qubit{}));
  return identifier_encode(std::move(state), pair_index, eve_qubit);
}

PureState ghz_rotated(double theta) {
  PureState psi = tensor(bell_phi_plus(kGhzAlice, kGhzBob), single_qubit(kGhzEve, Qubit{}));
  psi = apply_cnot(psi, kGhzAlice, kGhzEve);
  psi = apply_rotation(psi, kGhzAlice, theta);
  return apply_rotation(psi, kGhzBob, theta);
}

namespace {

double answer_with_share(const PureState& abe, const Challenge& challenge) {
  const Challenge c{1, challenge.a, challenge.b};
  JointState s;
  s.add(abe);
  s.add(single_qubit(c.label(), c.state()));
  s.cnot(kGhzEve, c.label());
  return verifier_decode_and_test(std::move(s), 1, c, 0.0).prob_pass;
}

}  // namespace

double ghz_exploit_pass_probability(double theta, const Challenge& challenge, bool flip_first) {
  PureState psi = ghz_rotated(theta);
  if (flip_first) psi = apply_not(psi, kGhzEve);
  return answer_with_share(psi, challenge);
}

KeyStealOutcome quarter_pi_key_steal(double key_theta, const Challenge& challenge) {
  PureState psi = apply_rotation(ghz_rotated(key_theta), kGhzEve, kQuarterPi);
  psi = apply_cnot(psi, kGhzAlice, kGhzEve);
  const Labels be{kGhzBob, kGhzEve};
  const double f = fidelity(bell_phi_plus(kGhzBob, kGhzEve), partial_trace(psi, be));
  const double offset = std::remainder(key_theta - kQuarterPi, std::numbers::pi);
  const double pass = answer_with_share(psi, challenge);
  return {psi, f, pass, std::abs(offset) < 1e-9};
}

bool fixed_angle_uses_not(double theta) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return s * s > c * c;
}

double fixed_angle_impersonate_pass(double theta, const Challenge& challenge) {
  return ghz_exploit_pass_probability(theta, challenge, fixed_angle_uses_not(theta));
}

Outcome sample_fixed_angle_impersonate(double theta, Rng& rng, ChallengeEnsemble ensemble) {
  const Challenge c = make_challenge(rng, 1, ensemble);
  PureState psi = ghz_rotated(theta);
  if (fixed_angle_uses_not(theta)) psi = apply_not(psi, kGhzEve);
  JointState s;
  s.add(psi);
  s.add(single_qubit(c.label(), c.state()));
  s.cnot(kGhzEve, c.label());
  return verifier_decode_and_test(std::move(s), 1, c, rng.uniform()).outcome;
}

namespace {

double key_steal_from(const PureState& rotated, double phi1, double phi2) {
  PureState psi = apply_rotation(rotated, kGhzEve, phi1);
  psi = apply_cnot(psi, kGhzAlice, kGhzEve);
  psi = apply_rotation(psi, kGhzEve, phi2);
  const Labels be{kGhzBob, kGhzEve};
  return fidelity(bell_phi_plus(kGhzBob, kGhzEve), partial_trace(psi, be));
}

}  // namespace

double fixed_angle_key_steal(double theta, double phi1, double phi2) {
  return key_steal_from(ghz_rotated(theta), phi1, phi2);
}

KeyStealOptimum maximize_key_steal(double theta, int grid) {
  if (grid < 4) throw ConfigError("grid must have at least 4 points per axis");
  // R(phi + pi) = -R(phi), so [0, pi) covers every distinct rotation.
  const PureState rotated = ghz_rotated(theta);
  const double step = std::numbers::pi / grid;
  KeyStealOptimum best{-1.0, 0.0, 0.0};
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double f = key_steal_from(rotated, i * step, j * step);
      if (f > best.fidelity) best = {f, i * step, j * step};
    }
  }
  // Compass search around the best grid node.
  double h = step;
  while (h > 1e-10) {
    bool improved = false;
    const double moves[4][2] = {{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}};
    for (const auto& m : moves) {
      const double p1 = best.phi1 + m[0];
      const double p2 = best.phi2 + m[1];
      const double f = key_steal_from(rotated, p1, p2);
      if (f > best.fidelity) {
        best = {f, p1, p2};
        improved = true;
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

}  // namespace eprauth
