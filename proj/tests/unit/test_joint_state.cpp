#include <doctest.h>

#include <random>

#include "eprauth/joint_state.hpp"
#include "reference.hpp"

using namespace eprauth;

namespace {

const QubitLabel kA{Party::Alice, 1};
const QubitLabel kB{Party::Bob, 1};
const QubitLabel kC{Party::Challenge, 1};
const QubitLabel kE{Party::Eve, 0};

}  // namespace

TEST_CASE("factors merge only when a gate spans them") {
  JointState s;
  s.add(bell_phi_plus(kA, kB));
  s.add(single_qubit(kC, {0.6, 0.8}));
  CHECK(s.factors().size() == 2);
  s.rotate(kA, 0.4);
  CHECK(s.factors().size() == 2);
  s.cnot(kA, kC);
  CHECK(s.factors().size() == 1);
  CHECK(s.contains(kC));
  CHECK_FALSE(s.contains(kE));
}

TEST_CASE("adding an existing label throws") {
  JointState s;
  s.add(single_qubit(kA, {1.0, 0.0}));
  CHECK_THROWS((void)s.add(single_qubit(kA, {1.0, 0.0})));
  CHECK_THROWS((void)s.rotate(kE, 0.1));
}

TEST_CASE("discard traces the qubit out") {
  JointState s;
  s.add(bell_phi_plus(kA, kB));
  s.discard(kB);
  CHECK_FALSE(s.contains(kB));
  const QubitLabel keep[] = {kA};
  CHECK((s.reduced(keep).matrix() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reduced returns labels in the requested order") {
  JointState s;
  s.add(single_qubit(kA, {0.0, 1.0}));
  s.add(single_qubit(kB, {1.0, 0.0}));
  const QubitLabel ba[] = {kB, kA};
  const MixedState r = s.reduced(ba);
  CHECK(r.labels() == Labels{kB, kA});
  // B = 0 is bit 0, A = 1 is bit 1
  CHECK(std::abs(r.matrix()(2, 2).real() - 1.0) < 1e-15);
}

TEST_CASE("random circuits agree with a single-register reference") {
  std::mt19937_64 g(29);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> angle(0.0, 6.3);
  const Labels labels{kA, kB, kC, kE};
  for (int rep = 0; rep < 40; ++rep) {
    JointState s;
    s.add(bell_phi_plus(kA, kB));
    const ref::V c = ref::haar_qubit(g);
    s.add(single_qubit(kC, {c(0), c(1)}));
    const ref::M e = ref::random_density(g, 2);
    s.add(MixedState::make({kE}, e));

    ref::M rho = ref::kron(ref::kron(e, ref::density(c)), ref::density(ref::bell()));
    for (int step = 0; step < 12; ++step) {
      const int a = pick(g);
      int b = pick(g);
      if (b == a) b = (a + 1) % 4;
      switch (step % 3) {
        case 0: {
          const double t = angle(g);
          s.rotate(labels[a], t);
          const ref::M op = ref::on_qubit(4, a, ref::rot(t));
          rho = op * rho * op.adjoint();
          break;
        }
        case 1: {
          s.cnot(labels[a], labels[b]);
          const ref::M op = ref::cnot(4, a, b);
          rho = op * rho * op.adjoint();
          break;
        }
        default: {
          const ref::M u = ref::random_unitary(g, 4);
          s.apply_two(labels[a], labels[b], Matrix4(u));
          const ref::M op = ref::on_pair(4, a, b, u);
          rho = op * rho * op.adjoint();
        }
      }
    }
    const ref::V basis = ref::haar_qubit(g);
    const Qubit q{basis(0), basis(1)};
    const double p = s.pass_probability(kB, q);
    CHECK(std::abs(p - ref::expect(ref::partial_trace(rho, 4, {1}), basis)) < 1e-12);

    const QubitLabel keep[] = {kE, kA};
    CHECK((s.reduced(keep).matrix() - ref::partial_trace(rho, 4, {3, 0})).cwiseAbs().maxCoeff() <
          1e-12);

    s.project(kB, q, Outcome::Pass);
    CHECK(std::abs(s.pass_probability(kB, q) - 1.0) < 1e-10);
  }
}
