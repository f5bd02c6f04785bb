#include <doctest.h>

#include <numbers>
#include <random>

#include "eprauth/quantum.hpp"
#include "reference.hpp"

using namespace eprauth;

namespace {

const QubitLabel kA{Party::Alice, 1};
const QubitLabel kB{Party::Bob, 1};
const QubitLabel kE{Party::Eve, 0};

Labels abe() { return {kA, kB, kE}; }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("single-qubit gates match the Kronecker reference") {
  std::mt19937_64 g(7);
  for (int rep = 0; rep < 50; ++rep) {
    const ref::V psi = ref::random_state(g, 8);
    const PureState s = make_pure(abe(), psi);
    const ref::M u = ref::random_unitary(g, 2);
    for (int k = 0; k < 3; ++k) {
      const PureState out = apply_single(s, abe()[k], Matrix2(u));
      const ref::V want = ref::on_qubit(3, k, u) * psi;
      CHECK((out.amplitudes() - want).norm() < 1e-12);
    }
  }
}

TEST_CASE("rotation convention") {
  const Matrix2 r = rotation_matrix(0.3);
  CHECK(std::abs(r(0, 0) - std::cos(0.3)) < 1e-15);
  CHECK(std::abs(r(0, 1) - std::sin(0.3)) < 1e-15);
  CHECK(std::abs(r(1, 0) + std::sin(0.3)) < 1e-15);
  const PureState zero = single_qubit(kA, {1.0, 0.0});
  const PureState out = apply_rotation(zero, kA, 0.3);
  CHECK(std::abs(out.amplitudes()(0) - std::cos(0.3)) < 1e-15);
  CHECK(std::abs(out.amplitudes()(1) + std::sin(0.3)) < 1e-15);
}

TEST_CASE("cnot and two-qubit gates match the reference, pure and mixed") {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 30; ++rep) {
    const ref::V psi = ref::random_state(g, 8);
    const ref::M rho = ref::random_density(g, 8);
    const PureState s = make_pure(abe(), psi);
    const MixedState m = MixedState::make(abe(), rho);
    for (int c = 0; c < 3; ++c) {
      for (int t = 0; t < 3; ++t) {
        if (c == t) continue;
        const ref::M op = ref::cnot(3, c, t);
        CHECK((apply_cnot(s, abe()[c], abe()[t]).amplitudes() - op * psi).norm() < 1e-12);
        CHECK(max_abs(apply_cnot(m, abe()[c], abe()[t]).matrix() - op * rho * op.adjoint()) <
              1e-12);
        const ref::M u = ref::random_unitary(g, 4);
        const ref::M full = ref::on_pair(3, c, t, u);
        CHECK((apply_two(s, abe()[c], abe()[t], Matrix4(u)).amplitudes() - full * psi).norm() <
              1e-12);
        CHECK(max_abs(apply_two(m, abe()[c], abe()[t], Matrix4(u)).matrix() -
                      full * rho * full.adjoint()) < 1e-12);
      }
    }
  }
}

TEST_CASE("cnot is an involution and gates preserve norm and trace") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 100; ++rep) {
    const PureState s = make_pure(abe(), ref::random_state(g, 8));
    const PureState twice = apply_cnot(apply_cnot(s, kA, kE), kA, kE);
    CHECK((twice.amplitudes() - s.amplitudes()).norm() < 1e-12);
    const PureState r = apply_rotation(apply_not(s, kB), kE, 1.234);
    CHECK(std::abs(r.amplitudes().norm() - 1.0) < 1e-12);
    const MixedState m = MixedState::make(abe(), ref::random_density(g, 8));
    const MixedState mr = apply_rotation(apply_cnot(m, kB, kA), kE, -0.7);
    CHECK(std::abs(mr.matrix().trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("tensor ordering is little-endian over the concatenated labels") {
  const PureState a = single_qubit(kA, {0.6, 0.8});
  const PureState b = single_qubit(kB, {0.0, 1.0});
  const PureState ab = tensor(a, b);
  REQUIRE(ab.labels() == Labels{kA, kB});
  const ref::V want = ref::product({ref::qubit(0.6, 0.8), ref::qubit(0.0, 1.0)});
  CHECK((ab.amplitudes() - want).norm() < 1e-15);
  CHECK(std::abs(ab.amplitudes()(2) - 0.6) < 1e-15);
}

TEST_CASE("partial trace matches the reference and undoes tensor") {
  std::mt19937_64 g(5);
  for (int rep = 0; rep < 30; ++rep) {
    const ref::V psi = ref::random_state(g, 8);
    const PureState s = make_pure(abe(), psi);
    const QubitLabel keep[] = {kA, kE};
    const MixedState red = partial_trace(s, keep);
    CHECK(max_abs(red.matrix() - ref::partial_trace(ref::density(psi), 3, {0, 2})) < 1e-12);

    const MixedState x = MixedState::make({kA, kB}, ref::random_density(g, 4));
    const MixedState y = MixedState::make({kE}, ref::random_density(g, 2));
    const QubitLabel ab[] = {kA, kB};
    CHECK(max_abs(partial_trace(tensor(x, y), ab).matrix() - x.matrix()) < 1e-12);
    CHECK(std::abs(partial_trace(tensor(x, y), ab).matrix().trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("reorder permutes the register consistently") {
  std::mt19937_64 g(9);
  const ref::V psi = ref::random_state(g, 8);
  const PureState s = make_pure(abe(), psi);
  const PureState r = reorder(s, {kE, kA, kB});
  const PureState u = make_pure({kE, kA, kB}, r.amplitudes());
  CHECK(fidelity(s, reorder(u, abe())) > 1.0 - 1e-12);
  // new order E, A, B: E is now bit 0, A bit 1
  CHECK(std::abs(r.amplitudes()(1) - psi(4)) < 1e-15);
  CHECK(std::abs(r.amplitudes()(2) - psi(1)) < 1e-15);
}

TEST_CASE("fidelity and trace distance properties") {
  std::mt19937_64 g(13);
  const Labels ab{kA, kB};
  for (int rep = 0; rep < 200; ++rep) {
    const MixedState r = MixedState::make(ab, ref::random_density(g, 4));
    const MixedState s = MixedState::make(ab, ref::random_density(g, 4));
    const MixedState t = MixedState::make(ab, ref::random_density(g, 4));
    const double f = fidelity(r, s);
    CHECK(f >= -1e-12);
    CHECK(f <= 1.0 + 1e-12);
    CHECK(std::abs(f - fidelity(s, r)) < 1e-9);
    CHECK(std::abs(fidelity(r, r) - 1.0) < 1e-9);
    const double d = trace_distance(r, s);
    CHECK(std::abs(d - ref::trace_norm(r.matrix() - s.matrix())) < 1e-12);
    CHECK(d <= trace_distance(r, t) + trace_distance(t, s) + 1e-12);
    CHECK(d <= 2.0 + 1e-12);
    // Fuchs-van de Graaf with T = Tr|.|: 1 - sqrt(F) <= T/2 <= sqrt(1 - F)
    CHECK(1.0 - std::sqrt(f) <= d / 2.0 + 1e-9);
    CHECK(d / 2.0 <= std::sqrt(std::max(0.0, 1.0 - f)) + 1e-9);

    const ref::V u = ref::random_state(g, 4);
    const PureState pu = make_pure(ab, u);
    CHECK(std::abs(fidelity(pu, r) - ref::expect(r.matrix(), u)) < 1e-12);
    CHECK(std::abs(fidelity(pu, MixedState::from_pure(pu)) - 1.0) < 1e-12);
  }
}

TEST_CASE("orthogonal pure states are at trace distance 2") {
  const PureState zero = single_qubit(kA, {1.0, 0.0});
  const PureState one = single_qubit(kA, {0.0, 1.0});
  CHECK(std::abs(trace_distance(zero, one) - 2.0) < 1e-12);
  CHECK(std::abs(fidelity(zero, one)) < 1e-15);
  CHECK(std::abs(trace_distance(zero, zero)) < 1e-12);
}

TEST_CASE("fidelity and distance compare by label, not position") {
  std::mt19937_64 g(17);
  const PureState s = make_pure({kA, kB}, ref::random_state(g, 4));
  const PureState swapped = reorder(s, {kB, kA});
  CHECK(std::abs(fidelity(s, swapped) - 1.0) < 1e-12);
  CHECK(std::abs(trace_distance(s, swapped)) < 1e-9);
}

TEST_CASE("measurement in a basis") {
  std::mt19937_64 g(19);
  for (int rep = 0; rep < 50; ++rep) {
    const ref::V psi = ref::random_state(g, 8);
    const PureState s = make_pure(abe(), psi);
    const ref::V basis = ref::haar_qubit(g);
    const Qubit q{basis(0), basis(1)};
    const ref::M proj = ref::on_qubit(3, 1, ref::density(basis));
    const double want = (psi.adjoint() * proj * psi)(0, 0).real();
    const double p = pass_probability(s, kB, q);
    CHECK(std::abs(p - want) < 1e-12);
    CHECK(std::abs(pass_probability(MixedState::from_pure(s), kB, q) - want) < 1e-12);

    const PureState post = project(s, kB, q, Outcome::Pass);
    const ref::V expect = proj * psi / std::sqrt(want);
    CHECK(std::abs(fidelity(post, make_pure(abe(), expect)) - 1.0) < 1e-12);
    CHECK(std::abs(pass_probability(post, kB, q) - 1.0) < 1e-12);
    CHECK(std::abs(pass_probability(project(s, kB, q, Outcome::Fail), kB, q)) < 1e-12);

    CHECK(measure_in_basis(s, kB, q, std::nextafter(p, 0.0)).outcome == Outcome::Pass);
    CHECK(measure_in_basis(s, kB, q, p).outcome == Outcome::Fail);
  }
}

TEST_CASE("channels: a measurement channel dephases") {
  const PureState plus = single_qubit(kA, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  Matrix2 p0 = Matrix2::Zero();
  Matrix2 p1 = Matrix2::Zero();
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  const Matrix2 kraus[] = {p0, p1};
  const MixedState out = apply_channel(MixedState::from_pure(plus), kA, kraus);
  CHECK(max_abs(out.matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-15);
  const Matrix2 bad[] = {p0};
  CHECK_THROWS_AS((void)apply_channel(MixedState::from_pure(plus), kA, bad), QuantumError);
}

TEST_CASE("invalid input throws") {
  CHECK_THROWS_AS((void)make_pure({kA}, Vector::Zero(2)), QuantumError);
  CHECK_THROWS_AS((void)make_pure({kA, kB}, Vector::Ones(2)), QuantumError);
  CHECK_THROWS_AS((void)make_pure({kA, kA}, Vector::Ones(4)), QuantumError);

  Matrix nonherm = Matrix::Identity(2, 2) / 2.0;
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS((void)MixedState::make({kA}, nonherm), QuantumError);
  CHECK_THROWS_AS((void)MixedState::make({kA}, Matrix::Identity(2, 2)), QuantumError);
  Matrix negative = Matrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS((void)MixedState::make({kA}, negative), QuantumError);

  const PureState zero = single_qubit(kA, {1.0, 0.0});
  CHECK_THROWS_AS((void)project(zero, kA, {0.0, 1.0}, Outcome::Pass), QuantumError);
  CHECK_THROWS_AS((void)apply_cnot(zero, kA, kA), QuantumError);
  CHECK_THROWS_AS((void)apply_single(zero, kB, pauli_x()), QuantumError);
  CHECK_THROWS_AS((void)tensor(zero, zero), QuantumError);

  Matrix skew = Matrix::Zero(2, 2);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS((void)trace_norm(skew), QuantumError);
}

TEST_CASE("bilateral rotation leaves Phi+ invariant") {
  const PureState phi = bell_phi_plus(kA, kB);
  const ref::V bell = ref::bell();
  std::mt19937_64 g(23);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double t = u(g);
    const PureState r = apply_rotation(apply_rotation(phi, kA, t), kB, t);
    worst = std::max(worst, 1.0 - fidelity(phi, r));
    const ref::V want = ref::kron(ref::rot(t), ref::rot(t)) * bell;
    CHECK((r.amplitudes() - want).norm() < 1e-12);
  }
  CHECK(worst < 1e-12);
}
