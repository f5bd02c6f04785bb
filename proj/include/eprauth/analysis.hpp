// Closed-form security and robustness results, each paired with an
// independent computation by direct state evolution.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "eprauth/adversary.hpp"
#include "eprauth/protocol.hpp"
#include "eprauth/rng.hpp"

namespace eprauth {

/// A closed form next to its brute-force value. The difference is always
/// reported, whatever its size.
struct OracleReport {
  std::string quantity;
  double closed_form = 0.0;
  double numeric = 0.0;
  double abs_difference = 0.0;
  std::string note;
};

OracleReport make_report(std::string quantity, double closed_form, double numeric,
                         std::string note = {});

/// F = 1/2 + sum_k p_k [Re(a* b a'_k b'_k*) + Re(a* b a'_k* b'_k)], evaluated
/// literally for the challenge (a, b) against Eve's response ensemble.
double eq7_fidelity(Complex a, Complex b, const ResponseEnsemble& ensemble);

/// Literal formula vs Bob's pass probability from direct evolution.
OracleReport eq7_report(const Challenge& challenge, const ResponseEnsemble& ensemble);

/// Average acceptance of an impostor over K' challenges: (1/2)^K'.
double detection_bound(int K_prime);

/// 1/2 sin^2(theta).
double ghz_detection(double theta);
/// Uniform average of ghz_detection over theta: 1/4.
inline constexpr double kGhzDetectionAverage = 0.25;

/// max{1 - 1/2 sin^2, 1 - 1/2 cos^2}.
double p1(double theta);
/// 1/2 (|cos| + |sin|)^2.
double p2(double theta);

/// Exact ensemble average of f over challenges, via challenge_design().
double design_average(ChallengeEnsemble ensemble, const std::function<double(const Challenge&)>& f);

/// Ensemble-averaged detection of the GHZ share answer at a fixed angle.
double ghz_detection_numeric(double theta, ChallengeEnsemble ensemble = ChallengeEnsemble::Haar);

struct OptimalAngle {
  std::array<double, 2> theta{};       ///< roots in [0, pi/4] and [pi/4, pi/2]
  std::array<double, 2> cos_values{};  ///< |cos theta| at each root
  double P = 0.0;                      ///< P1 = P2 at the root
  double residual = 0.0;               ///< max |P1 - P2| over both roots
};

/// Bisection on P1 - P2 to machine precision.
OptimalAngle optimal_fixed_angle();

struct RobustnessReport {
  double epsilon = 0.0;
  double trace_distance_bound = 0.0;   ///< 2 sqrt(eps)
  double failure_prob_bound = 0.0;     ///< eps
  double failure_probability = 0.0;    ///< for the given challenge
  double failure_probability_average = 0.0;  ///< over the challenge ensemble
  double distance_before = 0.0;        ///< T(|Phi+><Phi+|, rho)
  double distance_after = 0.0;         ///< T(|Phi+><Phi+|, rho') after the round
  double fidelity_before = 0.0;
  double fidelity_after = 0.0;
};

/// (1 - eps)|Phi+><Phi+| + eps rho1 on (A1, B1).
MixedState corrupted_key(double epsilon, const Matrix& rho1);

/// One honest round on the corrupted key with rotation angle `theta`,
/// evolved as a density matrix. rho' averages both measurement branches.
RobustnessReport robustness_bounds(double epsilon, const Matrix& rho1, double theta,
                                   const Challenge& challenge,
                                   ChallengeEnsemble ensemble = ChallengeEnsemble::Haar);

/// Ginibre-distributed random density matrix of dimension `dim`.
Matrix random_density_matrix(Rng& rng, int dim);

}  // namespace eprauth
