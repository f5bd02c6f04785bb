#include "eprauth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace eprauth {

OracleReport make_report(std::string quantity, double closed_form, double numeric,
                         std::string note) {
  return {std::move(quantity), closed_form, numeric, std::abs(closed_form - numeric),
          std::move(note)};
}

double eq7_fidelity(Complex a, Complex b, const ResponseEnsemble& ensemble) {
  double f = 0.5;
  for (const auto& c : ensemble) {
    const Complex ap = c.state.a;
    const Complex bp = c.state.b;
    f += c.probability * (std::real(std::conj(a) * b * ap * std::conj(bp)) +
                          std::real(std::conj(a) * b * std::conj(ap) * bp));
  }
  return f;
}

OracleReport eq7_report(const Challenge& challenge, const ResponseEnsemble& ensemble) {
  return make_report("impersonation_pass", eq7_fidelity(challenge.a, challenge.b, ensemble),
                     impersonation_pass_probability(challenge, ensemble),
                     "literal formula vs direct evolution");
}

double detection_bound(int K_prime) {
  if (K_prime < 0) throw std::invalid_argument("K_prime must be >= 0");
  return std::ldexp(1.0, -K_prime);
}

double ghz_detection(double theta) {
  const double s = std::sin(theta);
  return 0.5 * s * s;
}

double p1(double theta) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return std::max(1.0 - 0.5 * s * s, 1.0 - 0.5 * c * c);
}

double p2(double theta) {
  const double t = std::abs(std::cos(theta)) + std::abs(std::sin(theta));
  return 0.5 * t * t;
}

double design_average(ChallengeEnsemble ensemble,
                      const std::function<double(const Challenge&)>& f) {
  const auto design = challenge_design(ensemble);
  double total = 0.0;
  for (const auto& c : design) total += f(c);
  return total / static_cast<double>(design.size());
}

double ghz_detection_numeric(double theta, ChallengeEnsemble ensemble) {
  return design_average(ensemble, [theta](const Challenge& c) {
    return 1.0 - ghz_exploit_pass_probability(theta, c, false);
  });
}

namespace {

double bisect(double lo, double hi) {
  auto g = [](double t) { return p1(t) - p2(t); };
  double glo = g(lo);
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
}

}  // namespace

OptimalAngle optimal_fixed_angle() {
  constexpr double q = std::numbers::pi / 4.0;
  OptimalAngle out;
  out.theta = {bisect(0.0, q), bisect(q, 2.0 * q)};
  for (int k = 0; k < 2; ++k) {
    out.cos_values[k] = std::abs(std::cos(out.theta[k]));
    out.residual = std::max(out.residual, std::abs(p1(out.theta[k]) - p2(out.theta[k])));
  }
  out.P = p1(out.theta[0]);
  return out;
}

MixedState corrupted_key(double epsilon, const Matrix& rho1) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0, 1]");
  if (rho1.rows() != 4 || rho1.cols() != 4) throw QuantumError("rho1 must be 4x4");
  const QubitLabel a = key_qubit(Party::Alice, 1);
  const QubitLabel b = key_qubit(Party::Bob, 1);
  const MixedState phi = MixedState::from_pure(bell_phi_plus(a, b));
  const MixedState noise = MixedState::make({a, b}, rho1);
  return MixedState::make({a, b}, (1.0 - epsilon) * phi.matrix() + epsilon * noise.matrix());
}

namespace {

struct HonestRound {
  double failure;
  MixedState after;
};

HonestRound honest_round(const MixedState& rho, double theta, const Challenge& challenge) {
  const QubitLabel a = key_qubit(Party::Alice, 1);
  const QubitLabel b = key_qubit(Party::Bob, 1);
  const Challenge c{1, challenge.a, challenge.b};
  JointState s;
  s.add(rho);
  s.rotate(a, theta);
  s.rotate(b, theta);
  s.add(single_qubit(c.label(), c.state()));
  s = identifier_encode(std::move(s), 1, c.label());
  s.cnot(b, c.label());
  const double p = s.pass_probability(c.label(), c.state());
  s.discard(c.label());
  const Labels keep{a, b};
  return {1.0 - p, s.reduced(keep)};
}

}  // namespace

RobustnessReport robustness_bounds(double epsilon, const Matrix& rho1, double theta,
                                   const Challenge& challenge, ChallengeEnsemble ensemble) {
  const MixedState rho = corrupted_key(epsilon, rho1);
  const PureState phi = bell_phi_plus(key_qubit(Party::Alice, 1), key_qubit(Party::Bob, 1));
  const HonestRound round = honest_round(rho, theta, challenge);

  RobustnessReport r;
  r.epsilon = epsilon;
  r.trace_distance_bound = 2.0 * std::sqrt(epsilon);
  r.failure_prob_bound = epsilon;
  r.failure_probability = round.failure;
  r.failure_probability_average = design_average(
      ensemble, [&](const Challenge& c) { return honest_round(rho, theta, c).failure; });
  r.distance_before = trace_distance(phi, rho);
  r.distance_after = trace_distance(phi, round.after);
  r.fidelity_before = fidelity(phi, rho);
  r.fidelity_after = fidelity(phi, round.after);
  return r;
}

Matrix random_density_matrix(Rng& rng, int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

}  // namespace eprauth
