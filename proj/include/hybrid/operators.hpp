#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hybrid/config_space.hpp"

namespace hybrid {

/// Canonical operators of the three sectors. The enum order is the normal
/// order used for canonical words: modes Q, Q', C in turn, position before
/// momentum within a mode.
enum class Generator : std::uint8_t { Q = 0, P = 1, QPrime = 2, PPrime = 3, X = 4, K = 5 };

const char* generator_name(Generator g);

using Word = std::vector<Generator>;

/// Finite complex combination of operator words in the canonical operators,
/// stored in normal order ([q, p] = i hbar applied to reorder).
class QuantumOperator {
 public:
  QuantumOperator() = default;

  static QuantumOperator scalar(Complex c);
  static QuantumOperator identity() { return scalar(1.0); }
  static QuantumOperator generator(Generator g);

  QuantumOperator operator+(const QuantumOperator& rhs) const;
  QuantumOperator operator-(const QuantumOperator& rhs) const;
  QuantumOperator operator*(const QuantumOperator& rhs) const;
  QuantumOperator operator*(Complex c) const;
  friend QuantumOperator operator*(Complex c, const QuantumOperator& op) { return op * c; }

  QuantumOperator adjoint() const;
  /// (M + M^dagger) / 2.
  QuantumOperator hermitian_part() const;
  bool is_hermitian(double tol = 1e-12) const;

  /// [M, N] / (i hbar).
  QuantumOperator commutator_over_ihbar(const QuantumOperator& rhs) const;

  bool is_zero(double tol = 1e-14) const;
  std::size_t max_word_length() const;
  bool touches(Generator g) const;

  const std::map<Word, Complex>& terms() const noexcept { return terms_; }
  std::string to_string() const;

  /// M psi on the grid. Positions act by multiplication; momenta as
  /// -i hbar d/du with spectral differentiation.
  ComplexField apply(const ComplexField& psi, const GridSpec& grid) const;

 private:
  void accumulate(const Word& word, Complex coeff);
  void prune();

  std::map<Word, Complex> terms_;
};

}  // namespace hybrid
