// A register held as a product of independent factors. Gates touching two
// factors merge them; discarding a qubit traces it out of its factor.
#pragma once

#include <span>
#include <variant>
#include <vector>

#include "eprauth/quantum.hpp"

namespace eprauth {

class JointState {
 public:
  using Factor = std::variant<PureState, MixedState>;

  JointState() = default;

  void add(PureState s);
  void add(MixedState s);

  bool contains(const QubitLabel& q) const;
  Labels labels() const;
  const std::vector<Factor>& factors() const { return factors_; }

  void apply_single(const QubitLabel& q, const Matrix2& u);
  void apply_two(const QubitLabel& first, const QubitLabel& second, const Matrix4& u);
  void rotate(const QubitLabel& q, double theta);
  void apply_not(const QubitLabel& q);
  void cnot(const QubitLabel& control, const QubitLabel& target);
  /// Non-unitary evolution; the holding factor becomes a density matrix.
  void apply_channel(const QubitLabel& q, std::span<const Matrix2> kraus);

  double pass_probability(const QubitLabel& q, const Qubit& basis) const;
  void project(const QubitLabel& q, const Qubit& basis, Outcome which);

  /// Traces the qubit out of the register.
  void discard(const QubitLabel& q);

  /// Reduced state on `keep`, labels in the order given.
  MixedState reduced(std::span<const QubitLabel> keep) const;

 private:
  std::size_t factor_of(const QubitLabel& q) const;
  /// Merges the factors holding a and b and returns the merged index.
  std::size_t merge(const QubitLabel& a, const QubitLabel& b);
  void check_absent(const Labels& labels) const;

  std::vector<Factor> factors_;
};

}  // namespace eprauth
