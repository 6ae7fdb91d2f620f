#pragma once

// Ensemble observables C_f[P,S] and Q_M[P,S], their functional derivatives
// with respect to (P, S), and the hybrid Poisson bracket built from them.

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hybrid/classical_function.hpp"
#include "hybrid/config_space.hpp"
#include "hybrid/operators.hpp"

namespace hybrid {

enum class Sector { Classical, Quantum };

const char* sector_name(Sector s);

class EnsembleObservable {
 public:
  /// C_f[P,S] = ∫ P f(x, d_x S) dz.
  static EnsembleObservable classical(ClassicalPolynomial f, std::string label = {});
  /// Q_M[P,S] = <psi|M|psi>. The operator is replaced by its Hermitian part.
  static EnsembleObservable quantum(const QuantumOperator& m, std::string label = {});

  Sector sector() const noexcept;
  const ClassicalPolynomial& classical_payload() const;
  const QuantumOperator& quantum_payload() const;
  const std::string& label() const noexcept { return label_; }

  /// Same-sector linear combinations; SectorMixing otherwise.
  EnsembleObservable operator+(const EnsembleObservable& rhs) const;
  EnsembleObservable operator*(double c) const;

 private:
  EnsembleObservable(std::variant<ClassicalPolynomial, QuantumOperator> payload, std::string label)
      : payload_(std::move(payload)), label_(std::move(label)) {}

  std::variant<ClassicalPolynomial, QuantumOperator> payload_;
  std::string label_;
};

struct VariationalDerivative {
  RealField dA_dP;
  RealField dA_dS;
};

/// Value of the functional at arbitrary (P, S), without any normalization
/// or node checks. Used for perturbed arguments.
double functional_value(const EnsembleObservable& obs, const GridSpec& grid, const RealField& p,
                        const RealField& s);

/// Throws NodeDominated when nodes with P < floor carry more than 1e-6 of the mass.
double eval_observable(const EnsembleObservable& obs, const MadelungFields& state,
                       double floor = kProbabilityFloor);

/// Analytic functional derivatives:
///   classical: dC/dP = f(x, d_x S), dC/dS = -d_x(P df/dk)
///   quantum:   dQ/dP = Re(conj(psi) M psi) / P,  dQ/dS = (2/hbar) Im(conj(psi) M psi)
/// with P floored at `floor` in the division.
VariationalDerivative variational_derivative(const EnsembleObservable& obs,
                                             const MadelungFields& state,
                                             double floor = kProbabilityFloor);

/// {A, B}_H = ∫ (dA/dP dB/dS - dA/dS dB/dP) dz.
double hybrid_bracket(const EnsembleObservable& a, const EnsembleObservable& b,
                      const MadelungFields& state);

/// The observable {A, B}_H is mapped onto: C_{{f,g}_P} for two classical
/// observables, Q_{[M,N]/(i hbar)} for two quantum ones. Throws SectorMixing
/// for a mixed pair.
EnsembleObservable bracket_image(const EnsembleObservable& a, const EnsembleObservable& b);

struct BracketRecord {
  std::string first;
  std::string second;
  std::string state_id;
  double value = 0.0;     // {A, B}_H
  double expected = 0.0;  // value of the image observable (0 for mixed pairs)
  double residual = 0.0;
};

struct HomomorphismReport {
  std::vector<BracketRecord> records;
  double max_residual = 0.0;
};

using ObservablePair = std::pair<EnsembleObservable, EnsembleObservable>;
using NamedState = std::pair<std::string, MadelungFields>;

/// Residual |{A,B}_H - image| for every pair on every state. Mixed-sector
/// pairs are compared against 0 (strong separability).
HomomorphismReport check_homomorphism(const std::vector<ObservablePair>& pairs,
                                      const std::vector<NamedState>& states);

/// {Q_M, C_f}_H. M must act on q, q' only (SectorMixing otherwise).
double strong_separability(const EnsembleObservable& m, const EnsembleObservable& f,
                           const MadelungFields& state);

}  // namespace hybrid
