#include "eprauth/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

namespace eprauth {

struct StateAccess {
  static PureState pure(Labels labels, Vector amplitudes) {
    return PureState(std::move(labels), std::move(amplitudes));
  }
  static MixedState mixed(Labels labels, Matrix matrix) {
    return MixedState(std::move(labels), std::move(matrix));
  }
};

namespace {

void check_unique(const Labels& labels) {
  std::set<QubitLabel> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw QuantumError("duplicate qubit labels in register");
}

std::size_t find_axis(const Labels& labels, const QubitLabel& q) {
  auto it = std::find(labels.begin(), labels.end(), q);
  if (it == labels.end()) throw QuantumError("unknown qubit label " + to_string(q));
  return static_cast<std::size_t>(it - labels.begin());
}

std::size_t dim_of(std::size_t qubits) { return std::size_t{1} << qubits; }

// Left-multiplies the embedded 2x2 operator onto every column of `m`.
void left_single(Matrix& m, std::size_t axis, const Matrix2& u) {
  const std::size_t bit = std::size_t{1} << axis;
  const auto dim = static_cast<std::size_t>(m.rows());
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const auto i0 = static_cast<Eigen::Index>(i);
    const auto i1 = static_cast<Eigen::Index>(i | bit);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const Complex x0 = m(i0, c);
      const Complex x1 = m(i1, c);
      m(i0, c) = u(0, 0) * x0 + u(0, 1) * x1;
      m(i1, c) = u(1, 0) * x0 + u(1, 1) * x1;
    }
  }
}

void left_two(Matrix& m, std::size_t axis1, std::size_t axis2, const Matrix4& u) {
  const std::size_t b1 = std::size_t{1} << axis1;
  const std::size_t b2 = std::size_t{1} << axis2;
  const auto dim = static_cast<std::size_t>(m.rows());
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & b1) || (i & b2)) continue;
    const Eigen::Index idx[4] = {static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i | b1),
                                 static_cast<Eigen::Index>(i | b2),
                                 static_cast<Eigen::Index>(i | b1 | b2)};
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      Complex x[4];
      for (int k = 0; k < 4; ++k) x[k] = m(idx[k], c);
      for (int r = 0; r < 4; ++r) {
        Complex acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += u(r, k) * x[k];
        m(idx[r], c) = acc;
      }
    }
  }
}

// rho -> U rho U^dagger, using Hermiticity of the result: (U (U rho)^dagger)^dagger.
template <class Op>
Matrix conjugate(const Matrix& rho, Op&& left) {
  Matrix m = rho;
  left(m);
  Matrix t = m.adjoint();
  left(t);
  return t.adjoint();
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Matrix2 projector(const Qubit& q) {
  Matrix2 p;
  p << q.a * std::conj(q.a), q.a * std::conj(q.b), q.b * std::conj(q.a), q.b * std::conj(q.b);
  return p;
}

Qubit normalized_basis(const Qubit& basis) {
  if (std::abs(basis.norm_squared() - 1.0) > kExactTol)
    throw QuantumError("measurement basis state is not normalized");
  return basis;
}

Matrix4 cnot_matrix() {
  // Basis index = control + 2 * target.
  Matrix4 u = Matrix4::Zero();
  u(0, 0) = 1.0;
  u(3, 1) = 1.0;
  u(2, 2) = 1.0;
  u(1, 3) = 1.0;
  return u;
}

// Index scatter tables for splitting a register into kept and traced axes.
struct Split {
  std::vector<std::size_t> keep_offset;  // full-index contribution of each reduced index
  std::vector<std::size_t> env_offset;   // full-index contribution of each environment index
  Labels kept;
};

Split split_register(const Labels& labels, std::span<const QubitLabel> keep) {
  if (keep.empty()) throw QuantumError("partial trace needs a non-empty keep set");
  std::vector<bool> kept_axis(labels.size(), false);
  for (const auto& q : keep) kept_axis[find_axis(labels, q)] = true;

  std::vector<std::size_t> keep_axes;
  std::vector<std::size_t> env_axes;
  Split out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (kept_axis[k]) {
      keep_axes.push_back(k);
      out.kept.push_back(labels[k]);
    } else {
      env_axes.push_back(k);
    }
  }
  auto scatter = [](const std::vector<std::size_t>& axes) {
    std::vector<std::size_t> table(dim_of(axes.size()));
    for (std::size_t r = 0; r < table.size(); ++r) {
      std::size_t full = 0;
      for (std::size_t j = 0; j < axes.size(); ++j)
        if (r & (std::size_t{1} << j)) full |= std::size_t{1} << axes[j];
      table[r] = full;
    }
    return table;
  };
  out.keep_offset = scatter(keep_axes);
  out.env_offset = scatter(env_axes);
  return out;
}

// perm[new_index] = old_index for moving `from` into `order`.
std::vector<std::size_t> reorder_permutation(const Labels& from, const Labels& order) {
  if (from.size() != order.size()) throw QuantumError("register mismatch");
  std::vector<std::size_t> axes(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) axes[j] = find_axis(from, order[j]);
  check_unique(order);
  std::vector<std::size_t> perm(dim_of(order.size()));
  for (std::size_t n = 0; n < perm.size(); ++n) {
    std::size_t old = 0;
    for (std::size_t j = 0; j < axes.size(); ++j)
      if (n & (std::size_t{1} << j)) old |= std::size_t{1} << axes[j];
    perm[n] = old;
  }
  return perm;
}

Matrix sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

std::string to_string(Party p) {
  switch (p) {
    case Party::Alice: return "A";
    case Party::Bob: return "B";
    case Party::Eve: return "E";
    case Party::Challenge: return "C";
  }
  return "?";
}

std::string to_string(const QubitLabel& q) { return to_string(q.owner) + std::to_string(q.index); }

// ---------------------------------------------------------------------------
// PureState / MixedState

PureState PureState::make(Labels labels, Vector amplitudes) {
  check_unique(labels);
  if (labels.size() > 20) throw QuantumError("register too large for dense simulation");
  if (static_cast<std::size_t>(amplitudes.size()) != dim_of(labels.size()))
    throw QuantumError("amplitude vector length must be 2^(number of labels)");
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw QuantumError("cannot normalize a zero vector");
  return PureState(std::move(labels), amplitudes / norm);
}

std::size_t PureState::axis(const QubitLabel& q) const { return find_axis(labels_, q); }

bool PureState::contains(const QubitLabel& q) const {
  return std::find(labels_.begin(), labels_.end(), q) != labels_.end();
}

MixedState MixedState::make(Labels labels, Matrix matrix) {
  check_unique(labels);
  const auto dim = static_cast<Eigen::Index>(dim_of(labels.size()));
  if (matrix.rows() != dim || matrix.cols() != dim)
    throw QuantumError("density matrix dimension must be 2^(number of labels)");
  if (max_abs(matrix - matrix.adjoint()) > kHermitianTol)
    throw QuantumError("density matrix is not Hermitian");
  Matrix h = hermitian_part(matrix);
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > kHermitianTol) throw QuantumError("density matrix trace must be 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kHermitianTol)
    throw QuantumError("density matrix has a negative eigenvalue");
  return MixedState(std::move(labels), h / tr);
}

MixedState MixedState::from_pure(const PureState& psi) {
  const Vector& v = psi.amplitudes();
  return MixedState(psi.labels(), v * v.adjoint());
}

MixedState MixedState::maximally_mixed(Labels labels) {
  check_unique(labels);
  const auto dim = static_cast<Eigen::Index>(dim_of(labels.size()));
  return MixedState(std::move(labels), Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

std::size_t MixedState::axis(const QubitLabel& q) const { return find_axis(labels_, q); }

bool MixedState::contains(const QubitLabel& q) const {
  return std::find(labels_.begin(), labels_.end(), q) != labels_.end();
}

double MixedState::purity() const { return (matrix_ * matrix_).trace().real(); }

PureState make_pure(Labels labels, Vector amplitudes) {
  return PureState::make(std::move(labels), std::move(amplitudes));
}

PureState bell_phi_plus(const QubitLabel& first, const QubitLabel& second) {
  Vector v = Vector::Zero(4);
  v(0) = v(3) = 1.0 / std::numbers::sqrt2;
  return PureState::make({first, second}, v);
}

PureState single_qubit(const QubitLabel& q, const Qubit& amplitudes) {
  Vector v(2);
  v << amplitudes.a, amplitudes.b;
  return PureState::make({q}, v);
}

// ---------------------------------------------------------------------------
// Composition

PureState tensor(const PureState& a, const PureState& b) {
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  check_unique(labels);
  const Vector& va = a.amplitudes();
  const Vector& vb = b.amplitudes();
  Vector v(va.size() * vb.size());
  for (Eigen::Index j = 0; j < vb.size(); ++j) v.segment(j * va.size(), va.size()) = va * vb(j);
  return StateAccess::pure(std::move(labels), std::move(v));
}

MixedState tensor(const MixedState& a, const MixedState& b) {
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  check_unique(labels);
  const Matrix& ma = a.matrix();
  const Matrix& mb = b.matrix();
  const Eigen::Index da = ma.rows();
  Matrix m(da * mb.rows(), da * mb.cols());
  for (Eigen::Index r = 0; r < mb.rows(); ++r)
    for (Eigen::Index c = 0; c < mb.cols(); ++c) m.block(r * da, c * da, da, da) = ma * mb(r, c);
  return StateAccess::mixed(std::move(labels), std::move(m));
}

PureState reorder(const PureState& s, const Labels& order) {
  const auto perm = reorder_permutation(s.labels(), order);
  Vector v(s.amplitudes().size());
  for (std::size_t n = 0; n < perm.size(); ++n)
    v(static_cast<Eigen::Index>(n)) = s.amplitudes()(static_cast<Eigen::Index>(perm[n]));
  return StateAccess::pure(order, std::move(v));
}

MixedState reorder(const MixedState& s, const Labels& order) {
  const auto perm = reorder_permutation(s.labels(), order);
  const auto dim = static_cast<Eigen::Index>(perm.size());
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c)
      m(r, c) = s.matrix()(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(r)]),
                           static_cast<Eigen::Index>(perm[static_cast<std::size_t>(c)]));
  return StateAccess::mixed(order, std::move(m));
}

// ---------------------------------------------------------------------------
// Gates

Matrix2 rotation_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix2 r;
  r << c, s, -s, c;
  return r;
}

Matrix2 pauli_x() {
  Matrix2 x;
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

Matrix4 swap_matrix() {
  Matrix4 u = Matrix4::Zero();
  u(0, 0) = 1.0;
  u(2, 1) = 1.0;
  u(1, 2) = 1.0;
  u(3, 3) = 1.0;
  return u;
}

PureState apply_single(const PureState& s, const QubitLabel& q, const Matrix2& u) {
  Matrix m = s.amplitudes();
  left_single(m, s.axis(q), u);
  return StateAccess::pure(s.labels(), m.col(0));
}

MixedState apply_single(const MixedState& s, const QubitLabel& q, const Matrix2& u) {
  const std::size_t axis = s.axis(q);
  Matrix m = conjugate(s.matrix(), [&](Matrix& x) { left_single(x, axis, u); });
  return StateAccess::mixed(s.labels(), std::move(m));
}

PureState apply_two(const PureState& s, const QubitLabel& first, const QubitLabel& second,
                    const Matrix4& u) {
  if (first == second) throw QuantumError("two-qubit gate needs distinct qubits");
  const std::size_t a1 = s.axis(first);
  const std::size_t a2 = s.axis(second);
  Matrix m = s.amplitudes();
  left_two(m, a1, a2, u);
  return StateAccess::pure(s.labels(), m.col(0));
}

MixedState apply_two(const MixedState& s, const QubitLabel& first, const QubitLabel& second,
                     const Matrix4& u) {
  if (first == second) throw QuantumError("two-qubit gate needs distinct qubits");
  const std::size_t a1 = s.axis(first);
  const std::size_t a2 = s.axis(second);
  Matrix m = conjugate(s.matrix(), [&](Matrix& x) { left_two(x, a1, a2, u); });
  return StateAccess::mixed(s.labels(), std::move(m));
}

MixedState apply_channel(const MixedState& s, const QubitLabel& q, std::span<const Matrix2> kraus) {
  Matrix2 completeness = Matrix2::Zero();
  for (const auto& k : kraus) completeness += k.adjoint() * k;
  if ((completeness - Matrix2::Identity()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw QuantumError("Kraus operators are not trace preserving");
  const std::size_t axis = s.axis(q);
  Matrix out = Matrix::Zero(s.matrix().rows(), s.matrix().cols());
  for (const auto& k : kraus) out += conjugate(s.matrix(), [&](Matrix& x) { left_single(x, axis, k); });
  return StateAccess::mixed(s.labels(), hermitian_part(out));
}

PureState apply_rotation(const PureState& s, const QubitLabel& q, double theta) {
  return apply_single(s, q, rotation_matrix(theta));
}

MixedState apply_rotation(const MixedState& s, const QubitLabel& q, double theta) {
  return apply_single(s, q, rotation_matrix(theta));
}

PureState apply_not(const PureState& s, const QubitLabel& q) { return apply_single(s, q, pauli_x()); }

MixedState apply_not(const MixedState& s, const QubitLabel& q) {
  return apply_single(s, q, pauli_x());
}

PureState apply_cnot(const PureState& s, const QubitLabel& control, const QubitLabel& target) {
  if (control == target) throw QuantumError("C-NOT control and target must differ");
  return apply_two(s, control, target, cnot_matrix());
}

MixedState apply_cnot(const MixedState& s, const QubitLabel& control, const QubitLabel& target) {
  if (control == target) throw QuantumError("C-NOT control and target must differ");
  return apply_two(s, control, target, cnot_matrix());
}

// ---------------------------------------------------------------------------
// Measurement

double pass_probability(const PureState& s, const QubitLabel& q, const Qubit& basis) {
  const Qubit b = normalized_basis(basis);
  Matrix m = s.amplitudes();
  left_single(m, s.axis(q), projector(b));
  return clamp01(m.col(0).squaredNorm());
}

double pass_probability(const MixedState& s, const QubitLabel& q, const Qubit& basis) {
  const Qubit b = normalized_basis(basis);
  Matrix m = s.matrix();
  left_single(m, s.axis(q), projector(b));
  return clamp01(m.trace().real());
}

PureState project(const PureState& s, const QubitLabel& q, const Qubit& basis, Outcome which) {
  const Qubit b = normalized_basis(basis);
  Matrix m = s.amplitudes();
  left_single(m, s.axis(q), projector(which == Outcome::Pass ? b : b.orthogonal()));
  const double norm = m.col(0).norm();
  if (norm < 1e-15) throw QuantumError("projection onto a zero-probability outcome");
  return StateAccess::pure(s.labels(), m.col(0) / norm);
}

MixedState project(const MixedState& s, const QubitLabel& q, const Qubit& basis, Outcome which) {
  const Qubit b = normalized_basis(basis);
  const std::size_t axis = s.axis(q);
  const Matrix2 p = projector(which == Outcome::Pass ? b : b.orthogonal());
  Matrix m = conjugate(s.matrix(), [&](Matrix& x) { left_single(x, axis, p); });
  const double tr = m.trace().real();
  if (tr < 1e-30) throw QuantumError("projection onto a zero-probability outcome");
  return StateAccess::mixed(s.labels(), hermitian_part(m) / tr);
}

namespace {
template <class State>
Measurement<State> measure_impl(const State& s, const QubitLabel& q, const Qubit& basis,
                                double uniform01) {
  const double p = pass_probability(s, q, basis);
  const Outcome outcome = uniform01 < p ? Outcome::Pass : Outcome::Fail;
  return {outcome, p, project(s, q, basis, outcome)};
}
}  // namespace

Measurement<PureState> measure_in_basis(const PureState& s, const QubitLabel& q,
                                        const Qubit& basis, double uniform01) {
  return measure_impl(s, q, basis, uniform01);
}

Measurement<MixedState> measure_in_basis(const MixedState& s, const QubitLabel& q,
                                         const Qubit& basis, double uniform01) {
  return measure_impl(s, q, basis, uniform01);
}

// ---------------------------------------------------------------------------
// Reduced states and distances

MixedState partial_trace(const PureState& s, std::span<const QubitLabel> keep) {
  const Split sp = split_register(s.labels(), keep);
  const auto dk = static_cast<Eigen::Index>(sp.keep_offset.size());
  const Vector& v = s.amplitudes();
  Matrix rho = Matrix::Zero(dk, dk);
  for (std::size_t e : sp.env_offset) {
    Vector slice(dk);
    for (Eigen::Index r = 0; r < dk; ++r)
      slice(r) = v(static_cast<Eigen::Index>(sp.keep_offset[static_cast<std::size_t>(r)] | e));
    rho += slice * slice.adjoint();
  }
  return StateAccess::mixed(sp.kept, std::move(rho));
}

MixedState partial_trace(const MixedState& s, std::span<const QubitLabel> keep) {
  const Split sp = split_register(s.labels(), keep);
  const auto dk = static_cast<Eigen::Index>(sp.keep_offset.size());
  Matrix rho = Matrix::Zero(dk, dk);
  for (std::size_t e : sp.env_offset)
    for (Eigen::Index r = 0; r < dk; ++r)
      for (Eigen::Index c = 0; c < dk; ++c)
        rho(r, c) += s.matrix()(
            static_cast<Eigen::Index>(sp.keep_offset[static_cast<std::size_t>(r)] | e),
            static_cast<Eigen::Index>(sp.keep_offset[static_cast<std::size_t>(c)] | e));
  return StateAccess::mixed(sp.kept, std::move(rho));
}

double fidelity(const PureState& a, const PureState& b) {
  const PureState bb = reorder(b, a.labels());
  return clamp01(std::norm(a.amplitudes().dot(bb.amplitudes())));
}

double fidelity(const PureState& a, const MixedState& b) {
  const MixedState bb = reorder(b, a.labels());
  const Vector& u = a.amplitudes();
  return clamp01(u.dot(bb.matrix() * u).real());
}

double fidelity(const MixedState& a, const PureState& b) { return fidelity(b, a); }

double fidelity(const MixedState& a, const MixedState& b) {
  const MixedState bb = reorder(b, a.labels());
  const Matrix root = sqrt_psd(a.matrix());
  const Matrix inner = root * bb.matrix() * root;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(inner), Eigen::EigenvaluesOnly);
  const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return clamp01(tr * tr);
}

double trace_norm(const Matrix& x) {
  if (max_abs(x - x.adjoint()) > kHermitianTol) throw QuantumError("operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const MixedState& a, const MixedState& b) {
  const MixedState bb = reorder(b, a.labels());
  return trace_norm(a.matrix() - bb.matrix());
}

double trace_distance(const PureState& a, const MixedState& b) {
  return trace_distance(MixedState::from_pure(a), b);
}

double trace_distance(const PureState& a, const PureState& b) {
  return trace_distance(MixedState::from_pure(a), MixedState::from_pure(b));
}

}  // namespace eprauth
