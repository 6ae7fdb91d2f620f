#include "hybrid/protocol.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hybrid {

namespace {

constexpr double kOrthogonalityTolerance = 1e-9;
constexpr double kFixTolerance = 1e-9;
constexpr double kCorrelationTolerance = 1e-9;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedScript, what); }

double qubit_entropy(const Matrix2c& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix2c> solver(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double l = solver.eigenvalues()(i);
    if (l > 1e-15) s -= l * std::log2(l);
  }
  return s;
}

}  // namespace

double probe_mutual_information(const TwoQubitState& rho) {
  const Matrix4c& m = rho.matrix();
  Matrix2c a = Matrix2c::Zero(), b = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        a(i, j) += m(2 * i + k, 2 * j + k);
        b(i, j) += m(2 * k + i, 2 * k + j);
      }
  return std::max(0.0, qubit_entropy(a) + qubit_entropy(b) - von_neumann_entropy(rho));
}

CQState::CQState(std::vector<CQBranch> branches) : branches_(std::move(branches)) {
  if (branches_.empty() || branches_.size() > 2)
    throw Error(ErrorCode::InvalidState, "a cq-state over one bit has one or two branches");
  double total = 0.0;
  for (const auto& b : branches_) {
    if (!(b.probability >= 0.0)) throw Error(ErrorCode::InvalidState, "negative branch probability");
    total += b.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidState, "branch probabilities do not sum to 1");
}

TwoQubitState CQState::average() const {
  Matrix4c rho = Matrix4c::Zero();
  for (const auto& b : branches_) rho += b.probability * b.state.matrix();
  return TwoQubitState(rho);
}

const char* party_name(Party party) {
  switch (party) {
    case Party::Q: return "Q";
    case Party::QPrime: return "Q'";
    case Party::C: return "C";
  }
  return "?";
}

Party parse_party(const std::string& text) {
  if (text == "Q") return Party::Q;
  if (text == "Q'") return Party::QPrime;
  if (text == "C") return Party::C;
  malformed("unknown party '" + text + "'");
}

Matrix2c named_gate(const std::string& name) {
  Matrix2c u;
  const double s = 1.0 / std::sqrt(2.0);
  if (name == "I") u << 1, 0, 0, 1;
  else if (name == "X") u << 0, 1, 1, 0;
  else if (name == "Y") u << 0, Complex(0, -1), Complex(0, 1), 0;
  else if (name == "Z") u << 1, 0, 0, -1;
  else if (name == "H") u << s, s, s, -s;
  else malformed("unknown gate '" + name + "'");
  return u;
}

Matrix4c apply_local(const Matrix4c& rho, const Matrix2c& u, Party target) {
  Matrix4c full = Matrix4c::Zero();
  const Matrix2c id = Matrix2c::Identity();
  const Matrix2c& a = target == Party::Q ? u : id;
  const Matrix2c& b = target == Party::Q ? id : u;
  if (target == Party::C) throw Error(ErrorCode::InvalidState, "local operations act on Q or Q'");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) full.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return full * rho * full.adjoint();
}

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Prepare: return "prepare";
    case StepKind::Interact: return "interact";
    case StepKind::MeasureMediator: return "measure_mediator";
    case StepKind::ConditionalLocalOp: return "conditional_local_op";
    case StepKind::VerifyEntanglement: return "verify_entanglement";
  }
  return "?";
}

const char* flag_name(AuditFlag flag) {
  switch (flag) {
    case AuditFlag::InitialCorrelation: return "INITIAL_CORRELATION";
    case AuditFlag::DirectQQInteraction: return "DIRECT_QQ_INTERACTION";
    case AuditFlag::MediatorMeasurement: return "MEDIATOR_MEASUREMENT";
    case AuditFlag::PostSelection: return "POST_SELECTION";
  }
  return "?";
}

HrProtocolTrace hr_qubit_protocol(const TwoQubitState& rho0, const TwoQubitState& rho1,
                                  const Matrix2c& local_fix, Party target) {
  const double overlap = std::abs((rho0.matrix() * rho1.matrix()).trace());
  if (overlap > kOrthogonalityTolerance) {
    std::ostringstream os;
    os << "tr(rho0 rho1) = " << overlap;
    throw Error(ErrorCode::NotOrthogonal, os.str());
  }
  if ((local_fix.adjoint() * local_fix - Matrix2c::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorCode::InvalidState, "local fix is not unitary");
  const Matrix4c fixed = apply_local(rho1.matrix(), local_fix, target);
  const double miss = (fixed - rho0.matrix()).cwiseAbs().maxCoeff();
  if (miss > kFixTolerance) {
    std::ostringstream os;
    os << "local fix leaves rho1 at distance " << miss << " from rho0";
    throw Error(ErrorCode::FixDoesNotMap, os.str());
  }
  CQState prep({{0.5, rho0}, {0.5, rho1}});
  TwoQubitState mixture = prep.average();
  std::array<TwoQubitState, 2> after{rho0, TwoQubitState(fixed)};
  TwoQubitState final_state(0.5 * (after[0].matrix() + after[1].matrix()));
  return HrProtocolTrace{std::move(prep), std::move(mixture), std::move(after), std::move(final_state)};
}

double von_neumann_entropy(const TwoQubitState& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(rho.matrix(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double l = solver.eigenvalues()(i);
    if (l > 1e-15) s -= l * std::log2(l);
  }
  return s;
}

double holevo_information(const CQState& state) {
  double average_entropy = 0.0;
  for (const auto& b : state.branches()) average_entropy += b.probability * von_neumann_entropy(b.state);
  return std::max(0.0, von_neumann_entropy(state.average()) - average_entropy);
}

CQState prepared_state(const ProtocolStep& prepare) {
  if (prepare.kind != StepKind::Prepare) malformed("not a prepare step");
  try {
    if (prepare.conditioned) {
      if (prepare.states.size() != 2) malformed("a conditioned prepare needs two states");
      return CQState({{0.5, TwoQubitState::named(prepare.states[0])},
                      {0.5, TwoQubitState::named(prepare.states[1])}});
    }
    if (prepare.states.size() != 1) malformed("a product prepare needs one state");
    return CQState({{1.0, TwoQubitState::named(prepare.states[0])}});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedScript) throw;
    malformed(e.what());
  }
}

AuditReport audit(const ProtocolScript& script) {
  if (script.steps.empty()) malformed("script has no steps");
  if (script.steps.front().kind != StepKind::Prepare) malformed("script must start with a prepare step");

  AuditReport report;
  bool measured = false;
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const ProtocolStep& step = script.steps[i];
    switch (step.kind) {
      case StepKind::Prepare: {
        if (i != 0) malformed("only one prepare step is allowed, at the start");
        const CQState prepared = prepared_state(step);
        report.preparation_holevo = holevo_information(prepared);
        report.probe_mutual_information = probe_mutual_information(prepared.average());
        if (step.conditioned || report.preparation_holevo > kCorrelationTolerance ||
            report.probe_mutual_information > kCorrelationTolerance)
          report.flags.insert(AuditFlag::InitialCorrelation);
        if (step.conditioned)
          report.notes.push_back(
              "conditioned preparation uses entangling gates as primitives; how they are realised is left unexplained");
        break;
      }
      case StepKind::Interact: {
        const Party a = step.pair[0], b = step.pair[1];
        if (a == b) malformed("an interaction needs two distinct parties");
        const bool qq = (a == Party::Q && b == Party::QPrime) || (a == Party::QPrime && b == Party::Q);
        if (qq) report.flags.insert(AuditFlag::DirectQQInteraction);
        if (!std::isfinite(step.coupling) || !std::isfinite(step.duration) || step.duration < 0.0)
          malformed("interaction parameters must be finite with duration >= 0");
        break;
      }
      case StepKind::MeasureMediator:
        measured = true;
        report.flags.insert(AuditFlag::MediatorMeasurement);
        break;
      case StepKind::ConditionalLocalOp:
        if (!measured) malformed("conditional local operation before any mediator measurement");
        if (step.target == Party::C) malformed("conditional local operation must target Q or Q'");
        named_gate(step.ops[0]);
        named_gate(step.ops[1]);
        report.flags.insert(AuditFlag::PostSelection);
        break;
      case StepKind::VerifyEntanglement:
        break;
    }
  }
  report.notes.push_back(
      "only the product-state initial condition is checked; the sharp-observable variant is not implemented");
  report.witness_applicable = report.flags.empty();
  if (report.witness_applicable) {
    report.verdict = "witness assumptions satisfied";
  } else {
    std::ostringstream os;
    os << "witness assumptions violated:";
    for (AuditFlag f : report.flags) os << ' ' << flag_name(f);
    report.verdict = os.str();
  }
  return report;
}

WitnessVerdict witness_verdict(const AuditReport& report, bool entangled) {
  WitnessVerdict v;
  v.note = kInteroperabilityNote;
  for (AuditFlag f : report.flags) v.flags.emplace_back(flag_name(f));
  if (!report.witness_applicable || !report.flags.empty()) {
    v.kind = VerdictKind::OutsideScope;
    v.text = kVerdictOutside;
  } else if (entangled) {
    v.kind = VerdictKind::RuledOut;
    v.text = kVerdictRuledOut;
  } else {
    v.kind = VerdictKind::Silent;
    v.text = kVerdictSilent;
  }
  return v;
}

}  // namespace hybrid
