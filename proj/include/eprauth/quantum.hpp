// Few-qubit dense linear algebra for the EPR-pair authentication simulator.
//
// Conventions used throughout:
//   * Qubit order is little-endian over the register's label list: label k is
//     bit k of the amplitude (or matrix) index.
//   * R(theta) = [[cos, sin], [-sin, cos]], so R(theta)|0> = cos|0> - sin|1>.
//   * fidelity() is the squared Uhlmann fidelity; for a pure |u> against a
//     mixed rho it is <u|rho|u>.
//   * trace_distance() is Tr|A - B| with no factor 1/2, so orthogonal pure
//     states are at distance 2.
#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eprauth {

struct StateAccess;

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

inline constexpr double kExactTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;

class QuantumError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Party : std::uint8_t { Alice, Bob, Eve, Challenge };

std::string to_string(Party p);

struct QubitLabel {
  Party owner = Party::Alice;
  std::uint32_t index = 0;

  auto operator<=>(const QubitLabel&) const = default;
};

std::string to_string(const QubitLabel& q);

using Labels = std::vector<QubitLabel>;

/// A single-qubit pure state a|0> + b|1>, used as a measurement basis.
struct Qubit {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};

  double norm_squared() const { return std::norm(a) + std::norm(b); }
  /// b*|0> - a*|1>
  Qubit orthogonal() const { return {std::conj(b), -std::conj(a)}; }
};

class PureState {
 public:
  /// Normalizes the amplitudes. Throws on a dimension mismatch, duplicate
  /// labels or a zero vector.
  static PureState make(Labels labels, Vector amplitudes);

  const Labels& labels() const { return labels_; }
  const Vector& amplitudes() const { return amplitudes_; }
  std::size_t qubit_count() const { return labels_.size(); }
  std::size_t axis(const QubitLabel& q) const;
  bool contains(const QubitLabel& q) const;

 private:
  PureState(Labels labels, Vector amplitudes)
      : labels_(std::move(labels)), amplitudes_(std::move(amplitudes)) {}

  friend struct StateAccess;

  Labels labels_;
  Vector amplitudes_;
};

class MixedState {
 public:
  /// Validates Hermiticity (1e-10), unit trace and positivity (eigenvalues
  /// >= -1e-10). The matrix is symmetrized and rescaled to unit trace.
  static MixedState make(Labels labels, Matrix matrix);
  static MixedState from_pure(const PureState& psi);
  /// I / 2^n over the given labels.
  static MixedState maximally_mixed(Labels labels);

  const Labels& labels() const { return labels_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t qubit_count() const { return labels_.size(); }
  std::size_t axis(const QubitLabel& q) const;
  bool contains(const QubitLabel& q) const;
  double purity() const;

 private:
  MixedState(Labels labels, Matrix matrix)
      : labels_(std::move(labels)), matrix_(std::move(matrix)) {}

  friend struct StateAccess;

  Labels labels_;
  Matrix matrix_;
};

PureState make_pure(Labels labels, Vector amplitudes);

/// Amplitude of the tensor product at index i_a + 2^{n_a} i_b, labels a ++ b.
PureState tensor(const PureState& a, const PureState& b);
MixedState tensor(const MixedState& a, const MixedState& b);

/// Permutes the register into the given label order (same label set).
PureState reorder(const PureState& s, const Labels& order);
MixedState reorder(const MixedState& s, const Labels& order);

Matrix2 rotation_matrix(double theta);
Matrix2 pauli_x();
/// 4x4 SWAP in the little-endian two-qubit basis.
Matrix4 swap_matrix();

/// Applies a 2x2 unitary to one qubit (conjugation for mixed states).
PureState apply_single(const PureState& s, const QubitLabel& q, const Matrix2& u);
MixedState apply_single(const MixedState& s, const QubitLabel& q, const Matrix2& u);

/// Applies a 4x4 unitary; basis index is bit(first) + 2 bit(second).
PureState apply_two(const PureState& s, const QubitLabel& first, const QubitLabel& second,
                    const Matrix4& u);
MixedState apply_two(const MixedState& s, const QubitLabel& first, const QubitLabel& second,
                     const Matrix4& u);

/// rho -> sum_k K rho K^dagger on one qubit; the Kraus set must be trace preserving.
MixedState apply_channel(const MixedState& s, const QubitLabel& q, std::span<const Matrix2> kraus);

PureState apply_rotation(const PureState& s, const QubitLabel& q, double theta);
MixedState apply_rotation(const MixedState& s, const QubitLabel& q, double theta);

PureState apply_not(const PureState& s, const QubitLabel& q);
MixedState apply_not(const MixedState& s, const QubitLabel& q);

PureState apply_cnot(const PureState& s, const QubitLabel& control, const QubitLabel& target);
MixedState apply_cnot(const MixedState& s, const QubitLabel& control, const QubitLabel& target);

enum class Outcome : std::uint8_t { Pass, Fail };

template <class State>
struct Measurement {
  Outcome outcome;
  double prob_pass;
  State post_state;
};

/// Probability that the named qubit is found in `basis`.
double pass_probability(const PureState& s, const QubitLabel& q, const Qubit& basis);
double pass_probability(const MixedState& s, const QubitLabel& q, const Qubit& basis);

/// Projects the named qubit onto `basis` (pass) or its orthogonal complement
/// (fail) and renormalizes. Throws if the outcome has zero probability.
PureState project(const PureState& s, const QubitLabel& q, const Qubit& basis, Outcome which);
MixedState project(const MixedState& s, const QubitLabel& q, const Qubit& basis, Outcome which);

/// Samples an outcome using `uniform01` in [0, 1): pass iff u < prob_pass.
Measurement<PureState> measure_in_basis(const PureState& s, const QubitLabel& q,
                                        const Qubit& basis, double uniform01);
Measurement<MixedState> measure_in_basis(const MixedState& s, const QubitLabel& q,
                                         const Qubit& basis, double uniform01);

/// Reduced density matrix on `keep`, in register order.
MixedState partial_trace(const PureState& s, std::span<const QubitLabel> keep);
MixedState partial_trace(const MixedState& s, std::span<const QubitLabel> keep);

double fidelity(const PureState& a, const PureState& b);
double fidelity(const PureState& a, const MixedState& b);
double fidelity(const MixedState& a, const PureState& b);
double fidelity(const MixedState& a, const MixedState& b);

double trace_distance(const MixedState& a, const MixedState& b);
double trace_distance(const PureState& a, const MixedState& b);
double trace_distance(const PureState& a, const PureState& b);

/// Tr|X| for a Hermitian matrix; throws if X is not Hermitian within 1e-10.
double trace_norm(const Matrix& x);

/// |Phi+> = (|00> + |11>)/sqrt(2) over (first, second).
PureState bell_phi_plus(const QubitLabel& first, const QubitLabel& second);
PureState single_qubit(const QubitLabel& q, const Qubit& amplitudes);

}  // namespace eprauth
