#include "hybrid/ensemble_algebra.hpp"

#include <cmath>
#include <sstream>

namespace hybrid {

namespace {

constexpr double kNodeMassLimit = 1e-6;

void require_not_node_dominated(const MadelungFields& state, double floor) {
  const double mass = state.masked_mass(floor);
  if (mass > kNodeMassLimit) {
    std::ostringstream os;
    os << "nodes with P < " << floor << " carry mass " << mass;
    throw Error(ErrorCode::NodeDominated, os.str());
  }
}

ComplexField psi_from(const RealField& p, const RealField& s) {
  ComplexField psi(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k)
    psi[k] = std::polar(std::sqrt(std::max(p[k], 0.0)), s[k] / Constants::hbar);
  return psi;
}

std::string display(const EnsembleObservable& o) {
  if (!o.label().empty()) return o.label();
  return o.sector() == Sector::Classical ? "C[" + o.classical_payload().to_string() + "]"
                                         : "Q[" + o.quantum_payload().to_string() + "]";
}

}  // namespace

const char* sector_name(Sector s) { return s == Sector::Classical ? "classical" : "quantum"; }

EnsembleObservable EnsembleObservable::classical(ClassicalPolynomial f, std::string label) {
  return EnsembleObservable(std::move(f), std::move(label));
}

EnsembleObservable EnsembleObservable::quantum(const QuantumOperator& m, std::string label) {
  return EnsembleObservable(m.hermitian_part(), std::move(label));
}

Sector EnsembleObservable::sector() const noexcept {
  return std::holds_alternative<ClassicalPolynomial>(payload_) ? Sector::Classical
                                                               : Sector::Quantum;
}

const ClassicalPolynomial& EnsembleObservable::classical_payload() const {
  if (sector() != Sector::Classical)
    throw Error(ErrorCode::SectorMixing, "observable is not in the classical sector");
  return std::get<ClassicalPolynomial>(payload_);
}

const QuantumOperator& EnsembleObservable::quantum_payload() const {
  if (sector() != Sector::Quantum)
    throw Error(ErrorCode::SectorMixing, "observable is not in the quantum sector");
  return std::get<QuantumOperator>(payload_);
}

EnsembleObservable EnsembleObservable::operator+(const EnsembleObservable& rhs) const {
  if (sector() != rhs.sector())
    throw Error(ErrorCode::SectorMixing, "cannot add classical and quantum observables");
  if (sector() == Sector::Classical)
    return classical(classical_payload() + rhs.classical_payload());
  return quantum(quantum_payload() + rhs.quantum_payload());
}

EnsembleObservable EnsembleObservable::operator*(double c) const {
  if (sector() == Sector::Classical) return classical(classical_payload() * c);
  return quantum(quantum_payload() * Complex(c));
}

double functional_value(const EnsembleObservable& obs, const GridSpec& grid, const RealField& p,
                        const RealField& s) {
  if (obs.sector() == Sector::Classical) {
    const RealField x = grid.coordinate_field(Axis::X);
    const RealField k = gradient(s, Axis::X, grid);
    return quadrature(RealField(p * obs.classical_payload().evaluate(x, k)), grid);
  }
  const ComplexField psi = psi_from(p, s);
  const ComplexField m_psi = obs.quantum_payload().apply(psi, grid);
  return quadrature(ComplexField(psi.conjugate() * m_psi), grid).real();
}

double eval_observable(const EnsembleObservable& obs, const MadelungFields& state, double floor) {
  require_not_node_dominated(state, floor);
  return functional_value(obs, state.grid(), state.probability(), state.action());
}

VariationalDerivative variational_derivative(const EnsembleObservable& obs,
                                             const MadelungFields& state, double floor) {
  require_not_node_dominated(state, floor);
  const GridSpec& grid = state.grid();
  const RealField& p = state.probability();
  const RealField& s = state.action();

  if (obs.sector() == Sector::Classical) {
    const auto& f = obs.classical_payload();
    const RealField x = grid.coordinate_field(Axis::X);
    const RealField k = gradient(s, Axis::X, grid);
    RealField d_p = f.evaluate(x, k);
    RealField flux = p * f.d_dk().evaluate(x, k);
    RealField d_s = -gradient(flux, Axis::X, grid);
    return {std::move(d_p), std::move(d_s)};
  }

  const ComplexField psi = psi_from(p, s);
  const ComplexField local = psi.conjugate() * obs.quantum_payload().apply(psi, grid);
  RealField d_p = local.real() / p.max(floor);
  RealField d_s = (2.0 / Constants::hbar) * local.imag();
  return {std::move(d_p), std::move(d_s)};
}

double hybrid_bracket(const EnsembleObservable& a, const EnsembleObservable& b,
                      const MadelungFields& state) {
  const auto da = variational_derivative(a, state);
  const auto db = variational_derivative(b, state);
  const RealField integrand = da.dA_dP * db.dA_dS - da.dA_dS * db.dA_dP;
  return quadrature(integrand, state.grid());
}

EnsembleObservable bracket_image(const EnsembleObservable& a, const EnsembleObservable& b) {
  if (a.sector() != b.sector())
    throw Error(ErrorCode::SectorMixing, "bracket image is defined only within one sector");
  if (a.sector() == Sector::Classical) {
    return EnsembleObservable::classical(
        classical_poisson_bracket(a.classical_payload(), b.classical_payload()));
  }
  return EnsembleObservable::quantum(
      a.quantum_payload().commutator_over_ihbar(b.quantum_payload()));
}

HomomorphismReport check_homomorphism(const std::vector<ObservablePair>& pairs,
                                      const std::vector<NamedState>& states) {
  HomomorphismReport report;
  for (const auto& [id, state] : states) {
    for (const auto& [a, b] : pairs) {
      BracketRecord rec;
      rec.first = display(a);
      rec.second = display(b);
      rec.state_id = id;
      rec.value = hybrid_bracket(a, b, state);
      rec.expected = a.sector() == b.sector() ? eval_observable(bracket_image(a, b), state) : 0.0;
      rec.residual = std::abs(rec.value - rec.expected);
      report.max_residual = std::max(report.max_residual, rec.residual);
      report.records.push_back(std::move(rec));
    }
  }
  return report;
}

double strong_separability(const EnsembleObservable& m, const EnsembleObservable& f,
                           const MadelungFields& state) {
  if (m.sector() != Sector::Quantum || f.sector() != Sector::Classical)
    throw Error(ErrorCode::SectorMixing, "strong separability takes (quantum M, classical f)");
  const auto& op = m.quantum_payload();
  if (op.touches(Generator::X) || op.touches(Generator::K))
    throw Error(ErrorCode::SectorMixing, "M acts on the mediator coordinate; it must act on q, q' only");
  return hybrid_bracket(m, f, state);
}

}  // namespace hybrid
