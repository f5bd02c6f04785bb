#include "eprauth/joint_state.hpp"

#include <algorithm>
#include <iterator>
#include <optional>

#include <Eigen/Eigenvalues>

namespace eprauth {

namespace {

const Labels& labels_of(const JointState::Factor& f) {
  return std::visit([](const auto& s) -> const Labels& { return s.labels(); }, f);
}

MixedState as_mixed(const JointState::Factor& f) {
  if (const auto* p = std::get_if<PureState>(&f)) return MixedState::from_pure(*p);
  return std::get<MixedState>(f);
}

JointState::Factor tensor_factors(const JointState::Factor& a, const JointState::Factor& b) {
  const auto* pa = std::get_if<PureState>(&a);
  const auto* pb = std::get_if<PureState>(&b);
  if (pa && pb) return tensor(*pa, *pb);
  return tensor(as_mixed(a), as_mixed(b));
}

// Keeps rank-one reductions as state vectors; the global phase is arbitrary.
JointState::Factor simplify(MixedState m) {
  if (m.purity() < 1.0 - kExactTol) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  const Eigen::Index top = es.eigenvalues().size() - 1;
  return PureState::make(m.labels(), es.eigenvectors().col(top));
}

}  // namespace

void JointState::check_absent(const Labels& labels) const {
  for (const auto& q : labels)
    if (contains(q)) throw QuantumError("qubit " + to_string(q) + " already in register");
}

void JointState::add(PureState s) {
  check_absent(s.labels());
  factors_.emplace_back(std::move(s));
}

void JointState::add(MixedState s) {
  check_absent(s.labels());
  factors_.emplace_back(std::move(s));
}

bool JointState::contains(const QubitLabel& q) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) {
    const auto& l = labels_of(f);
    return std::find(l.begin(), l.end(), q) != l.end();
  });
}

Labels JointState::labels() const {
  Labels out;
  for (const auto& f : factors_) {
    const auto& l = labels_of(f);
    out.insert(out.end(), l.begin(), l.end());
  }
  return out;
}

std::size_t JointState::factor_of(const QubitLabel& q) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto& l = labels_of(factors_[i]);
    if (std::find(l.begin(), l.end(), q) != l.end()) return i;
  }
  throw QuantumError("unknown qubit label " + to_string(q));
}

std::size_t JointState::merge(const QubitLabel& a, const QubitLabel& b) {
  std::size_t ia = factor_of(a);
  const std::size_t ib = factor_of(b);
  if (ia == ib) return ia;
  factors_[ia] = tensor_factors(factors_[ia], factors_[ib]);
  factors_.erase(factors_.begin() + static_cast<std::ptrdiff_t>(ib));
  if (ib < ia) --ia;
  return ia;
}

void JointState::apply_single(const QubitLabel& q, const Matrix2& u) {
  auto& f = factors_[factor_of(q)];
  f = std::visit([&](const auto& s) -> Factor { return eprauth::apply_single(s, q, u); }, f);
}

void JointState::apply_two(const QubitLabel& first, const QubitLabel& second, const Matrix4& u) {
  if (first == second) throw QuantumError("two-qubit gate needs distinct qubits");
  auto& f = factors_[merge(first, second)];
  f = std::visit([&](const auto& s) -> Factor { return eprauth::apply_two(s, first, second, u); },
                 f);
}

void JointState::rotate(const QubitLabel& q, double theta) { apply_single(q, rotation_matrix(theta)); }

void JointState::apply_not(const QubitLabel& q) { apply_single(q, pauli_x()); }

void JointState::cnot(const QubitLabel& control, const QubitLabel& target) {
  if (control == target) throw QuantumError("C-NOT control and target must differ");
  auto& f = factors_[merge(control, target)];
  f = std::visit(
      [&](const auto& s) -> Factor { return eprauth::apply_cnot(s, control, target); }, f);
}

void JointState::apply_channel(const QubitLabel& q, std::span<const Matrix2> kraus) {
  auto& f = factors_[factor_of(q)];
  f = eprauth::apply_channel(as_mixed(f), q, kraus);
}

double JointState::pass_probability(const QubitLabel& q, const Qubit& basis) const {
  const auto& f = factors_[factor_of(q)];
  return std::visit([&](const auto& s) { return eprauth::pass_probability(s, q, basis); }, f);
}

void JointState::project(const QubitLabel& q, const Qubit& basis, Outcome which) {
  auto& f = factors_[factor_of(q)];
  f = std::visit([&](const auto& s) -> Factor { return eprauth::project(s, q, basis, which); }, f);
}

void JointState::discard(const QubitLabel& q) {
  const std::size_t i = factor_of(q);
  const Labels& l = labels_of(factors_[i]);
  if (l.size() == 1) {
    factors_.erase(factors_.begin() + static_cast<std::ptrdiff_t>(i));
    return;
  }
  Labels keep;
  std::copy_if(l.begin(), l.end(), std::back_inserter(keep),
               [&](const QubitLabel& x) { return x != q; });
  MixedState reduced = std::visit(
      [&](const auto& s) { return eprauth::partial_trace(s, std::span<const QubitLabel>(keep)); },
      factors_[i]);
  factors_[i] = simplify(std::move(reduced));
}

MixedState JointState::reduced(std::span<const QubitLabel> keep) const {
  if (keep.empty()) throw QuantumError("reduced state needs a non-empty keep set");
  std::vector<std::size_t> involved;
  for (const auto& q : keep) {
    const std::size_t i = factor_of(q);
    if (std::find(involved.begin(), involved.end(), i) == involved.end()) involved.push_back(i);
  }
  std::optional<MixedState> acc;
  for (std::size_t i : involved) {
    const auto& f = factors_[i];
    Labels local;
    for (const auto& q : labels_of(f))
      if (std::find(keep.begin(), keep.end(), q) != keep.end()) local.push_back(q);
    MixedState part = std::visit(
        [&](const auto& s) { return eprauth::partial_trace(s, std::span<const QubitLabel>(local)); },
        f);
    acc = acc ? tensor(*acc, part) : part;
  }
  return reorder(*acc, Labels(keep.begin(), keep.end()));
}

}  // namespace eprauth
