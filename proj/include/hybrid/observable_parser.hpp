#pragma once

// Mini-grammar for observables in experiment configs:
//
//   observable := ("C" | "Q") ":" expr
//   expr       := term (("+" | "-") term)*
//   term       := factor ("*" factor)*
//   factor     := "-" factor | primary ("^" integer)?
//   primary    := number | symbol | "(" expr ")"
//   symbol     := "q" | "q'" | "p" | "p'" | "x" | "k"
//
// Classical ("C:") expressions may use x and k only. Quantum ("Q:")
// expressions multiply in written order and are Hermitian-symmetrized;
// every word must have length <= 3.

#include <string_view>

#include "hybrid/ensemble_algebra.hpp"

namespace hybrid {

inline constexpr std::size_t kMaxQuantumWordLength = 3;

ClassicalPolynomial parse_classical(std::string_view text);
QuantumOperator parse_quantum(std::string_view text);
EnsembleObservable parse_observable(std::string_view text);

}  // namespace hybrid
