#include <doctest.h>

#include <cmath>

#include "eprauth/analysis.hpp"
#include "eprauth/montecarlo.hpp"

using namespace eprauth;

namespace {

Scenario scenario(int K, int Kp, std::optional<StrategyKind> kind, Quantity q, int trials) {
  Scenario s;
  s.session.K = K;
  s.session.K_prime = Kp;
  if (kind) {
    EveStrategy e;
    e.kind = *kind;
    s.strategy = e;
  }
  s.quantity = q;
  s.trials = trials;
  return s;
}

}  // namespace

TEST_CASE("scenario validation") {
  Scenario s = scenario(1, 1, std::nullopt, Quantity::Acceptance, 0);
  CHECK_THROWS_AS(validate(s), ConfigError);
  s = scenario(1, 1, StrategyKind::FixedAngleImpersonate, Quantity::Pass, 10);
  CHECK_THROWS_AS(validate(s), ConfigError);
  s = scenario(1, 1, StrategyKind::GhzInject, Quantity::KeyFidelity, 10);
  CHECK_THROWS_AS(validate(s), ConfigError);
  s = scenario(1, 1, StrategyKind::GhzInject, Quantity::Pass, 10);
  s.optimize_phases = true;
  CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("names round-trip") {
  for (auto q : {Quantity::Acceptance, Quantity::Pass, Quantity::Detection, Quantity::KeyFidelity})
    CHECK(parse_quantity(to_string(q)) == q);
  CHECK(parse_estimator("sampled") == Estimator::Sampled);
  CHECK_FALSE(parse_quantity("speed").has_value());
}

TEST_CASE("honest runs are exact") {
  const Estimate e = run(scenario(2, 2, std::nullopt, Quantity::Acceptance, 200), 1, 2);
  CHECK(std::abs(e.mean - 1.0) < 1e-12);
  CHECK(e.standard_error < 1e-12);
  REQUIRE(e.oracle.has_value());
  REQUIRE(e.z.has_value());
  CHECK(*e.z == 0.0);

  Scenario k = scenario(2, 2, std::nullopt, Quantity::KeyFidelity, 50);
  CHECK(std::abs(run(k, 3, 1).mean - 1.0) < 1e-12);
}

TEST_CASE("impersonation passes half the time") {
  Scenario s = scenario(1, 1, StrategyKind::RandomImpersonation, Quantity::Pass, 4000);
  const Estimate exact = run(s, 11, 0);
  CHECK(std::abs(exact.mean - 0.5) < 0.01);
  CHECK(std::abs(*exact.z) < 4.0);
  s.estimator = Estimator::Sampled;
  const Estimate sampled = run(s, 11, 0);
  CHECK(std::abs(sampled.mean - 0.5) < 5.0 * sampled.standard_error);
  CHECK(std::abs(sampled.standard_error - std::sqrt(0.25 / 4000)) < 1e-3);

  const Scenario k8 = scenario(8, 8, StrategyKind::RandomImpersonation, Quantity::Acceptance, 10);
  CHECK(*oracle_for(k8) == detection_bound(8));
}

TEST_CASE("GHZ detection averages: Haar 1/3, real amplitudes 1/4") {
  Scenario s = scenario(1, 1, StrategyKind::GhzInject, Quantity::Detection, 20000);
  const Estimate haar = run(s, 5, 0);
  CHECK(std::abs(haar.mean - 1.0 / 3.0) < 5.0 * haar.standard_error);
  s.session.challenge_ensemble = ChallengeEnsemble::RealAmplitude;
  const Estimate real = run(s, 5, 0);
  CHECK(std::abs(real.mean - 0.25) < 5.0 * real.standard_error);
  CHECK(*real.oracle == 0.25);
}

TEST_CASE("results do not depend on the thread count") {
  Scenario s = scenario(2, 2, StrategyKind::InterceptReturn, Quantity::Pass, 300);
  s.strategy->return_unitary = swap_matrix();
  const Estimate a = run(s, 99, 1);
  const Estimate b = run(s, 99, 3);
  const Estimate c = run(s, 99, 8);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == c.mean);
  CHECK(a.standard_error == c.standard_error);

  Scenario noisy = scenario(2, 2, StrategyKind::RandomImpersonation, Quantity::Pass, 300);
  const Estimate n1 = run(noisy, 99, 1);
  CHECK(n1.mean == run(noisy, 99, 4).mean);
  CHECK(run(noisy, 100, 1).mean != n1.mean);
}

TEST_CASE("intercept-return swap: exact detection is 1/2 on every trial") {
  Scenario s = scenario(1, 1, StrategyKind::InterceptReturn, Quantity::Detection, 100);
  s.strategy->return_unitary = swap_matrix();
  const Estimate e = run(s, 2, 1);
  CHECK(std::abs(e.mean - 0.5) < 1e-12);
  CHECK(std::abs(*e.oracle - 0.5) < 1e-12);
}

TEST_CASE("fixed-angle sweep under real challenges tracks P1") {
  Scenario s = scenario(1, 1, StrategyKind::FixedAngleImpersonate, Quantity::Pass, 3000);
  s.session.theta_mode = ThetaMode::Fixed;
  s.session.challenge_ensemble = ChallengeEnsemble::RealAmplitude;
  const auto grid = theta_grid(0.0, 1.5707963267948966, 5);
  const auto points = sweep(s, grid, 7, 0);
  REQUIRE(points.size() == 5);
  for (const auto& p : points) {
    REQUIRE(p.parameter.has_value());
    CHECK(std::abs(*p.oracle - p1(*p.parameter)) < 1e-15);
    CHECK(std::abs(p.mean - *p.oracle) < 5.0 * p.standard_error + 1e-12);
  }
  CHECK(std::abs(points.front().mean - 1.0) < 1e-12);
  CHECK(std::abs(points.back().mean - 1.0) < 1e-12);
}

TEST_CASE("theta grid") {
  const auto g = theta_grid(0.0, 1.0, 3);
  CHECK(g == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(theta_grid(2.0, 3.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS((void)theta_grid(0.0, 1.0, 0), ConfigError);
}
