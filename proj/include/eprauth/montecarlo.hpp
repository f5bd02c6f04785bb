// Seeded trial runner with confidence intervals and oracle comparison.
//
// Trial t draws everything from Rng::stream(seed, t), and per-trial values
// are summed in trial order, so results do not depend on the thread count.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eprauth/adversary.hpp"
#include "eprauth/protocol.hpp"

namespace eprauth {

enum class Quantity : std::uint8_t {
  Acceptance,   ///< whole round accepted
  Pass,         ///< first challenge passes
  Detection,    ///< first challenge fails
  KeyFidelity,  ///< Eve's key copy vs |Phi+> (honest: worst key pair)
};

/// Exact uses each trial's exact probability; Sampled uses its 0/1 outcome.
enum class Estimator : std::uint8_t { Exact, Sampled };

std::string to_string(Quantity q);
std::string to_string(Estimator e);
std::optional<Quantity> parse_quantity(std::string_view name);
std::optional<Estimator> parse_estimator(std::string_view name);

struct Scenario {
  SessionConfig session;
  std::optional<EveStrategy> strategy;
  Quantity quantity = Quantity::Acceptance;
  Estimator estimator = Estimator::Exact;
  int trials = 1000;
  /// FixedAngleKeySteal: replace phi1/phi2 by the grid-search optimum.
  bool optimize_phases = false;
};

void validate(const Scenario& scenario);

struct Estimate {
  Quantity quantity = Quantity::Acceptance;
  double mean = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int trials = 0;
  std::optional<double> oracle;
  /// (mean - oracle) / SE. An SE below 1e-12 is rounding noise: z is then 0
  /// if |mean - oracle| <= 1e-10 and absent otherwise.
  std::optional<double> z;
  std::optional<double> parameter;  ///< theta of a sweep point
};

/// Closed-form (or exact ensemble-average) value of the scenario's quantity.
std::optional<double> oracle_for(const Scenario& scenario);

/// One trial's value.
double run_trial(const Scenario& scenario, Rng& rng);

/// `threads` = 0 uses the hardware concurrency.
Estimate run(const Scenario& scenario, std::uint64_t seed, unsigned threads = 0);

/// Fixes the key angle (and the angle Eve assumes) to each grid value.
std::vector<Estimate> sweep(const Scenario& scenario, std::span<const double> thetas,
                            std::uint64_t seed, unsigned threads = 0);

/// `points` equally spaced values on [lo, hi], endpoints included.
std::vector<double> theta_grid(double lo, double hi, int points);

}  // namespace eprauth
