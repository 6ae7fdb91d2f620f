#pragma once

#include <array>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hybrid/entanglement.hpp"

namespace hybrid {

using Matrix2c = Eigen::Matrix2cd;

/// One value of the classical bit c together with the qubit state prepared for it.
struct CQBranch {
  double probability = 0.0;
  TwoQubitState state;
};

class CQState {
 public:
  /// Throws InvalidState unless there are one or two branches with
  /// nonnegative probabilities summing to 1 within 1e-12.
  explicit CQState(std::vector<CQBranch> branches);

  const std::vector<CQBranch>& branches() const noexcept { return branches_; }
  /// Sum_c p_c rho_c, the state of the qubits with the bit discarded.
  TwoQubitState average() const;

 private:
  std::vector<CQBranch> branches_;
};

enum class Party { Q, QPrime, C };
const char* party_name(Party party);
/// Accepts "Q", "Q'", "C". Throws MalformedScript.
Party parse_party(const std::string& text);

/// Single-qubit gates by name: I, X, Y, Z, H. Throws MalformedScript.
Matrix2c named_gate(const std::string& name);

/// Applies U to one qubit of a two-qubit state (Q is the first factor).
Matrix4c apply_local(const Matrix4c& rho, const Matrix2c& u, Party target);

enum class StepKind { Prepare, Interact, MeasureMediator, ConditionalLocalOp, VerifyEntanglement };
const char* step_kind_name(StepKind kind);

struct ProtocolStep {
  StepKind kind = StepKind::Prepare;

  // Prepare: one state name for a product preparation, two (bit 0, bit 1)
  // for a preparation conditioned on the classical bit.
  bool conditioned = false;
  std::vector<std::string> states;

  // Interact
  std::array<Party, 2> pair{Party::Q, Party::C};
  double coupling = 1.0;
  double duration = 1.0;
  bool controlled_on_bit = false;

  // ConditionalLocalOp: gate applied for bit 0 and for bit 1.
  Party target = Party::QPrime;
  std::array<std::string, 2> ops{"I", "I"};
};

struct ProtocolScript {
  std::string name;
  std::vector<ProtocolStep> steps;
};

enum class AuditFlag { InitialCorrelation, DirectQQInteraction, MediatorMeasurement, PostSelection };
const char* flag_name(AuditFlag flag);

struct AuditReport {
  std::set<AuditFlag> flags;
  bool witness_applicable = true;
  std::string verdict;
  std::vector<std::string> notes;
  double preparation_holevo = 0.0;
  /// Quantum mutual information between Q and Q' in the prepared state, bits.
  double probe_mutual_information = 0.0;
};

struct HrProtocolTrace {
  CQState preparation;
  /// Qubit state before the bit is revealed.
  TwoQubitState mixture;
  /// Qubit state in each branch after the conditional local operation.
  std::array<TwoQubitState, 2> branches_after;
  TwoQubitState final_state;
};

/// Bit-conditioned preparation of rho0 / rho1, readout of the bit and the
/// local fix on `target` for c = 1. Throws NotOrthogonal when
/// |tr(rho0 rho1)| > 1e-9 and FixDoesNotMap when the fix does not carry
/// rho1 to rho0 within 1e-9.
HrProtocolTrace hr_qubit_protocol(const TwoQubitState& rho0, const TwoQubitState& rho1,
                                  const Matrix2c& local_fix, Party target = Party::QPrime);

/// Von Neumann entropy in bits.
double von_neumann_entropy(const TwoQubitState& rho);

/// S(rho_Q) + S(rho_Q') - S(rho), in bits.
double probe_mutual_information(const TwoQubitState& rho);

/// S(sum p_c rho_c) - sum p_c S(rho_c), in bits.
double holevo_information(const CQState& state);

/// CQState produced by a Prepare step. Throws MalformedScript.
CQState prepared_state(const ProtocolStep& prepare);

/// INITIAL_CORRELATION is raised by a conditioned preparation or by any
/// preparation whose bit-qubit (Holevo) or Q-Q' correlation exceeds 1e-9.
/// Throws MalformedScript for scripts that do not start with exactly one
/// Prepare, interactions that are not between two distinct parties, or a
/// ConditionalLocalOp without an earlier MeasureMediator.
AuditReport audit(const ProtocolScript& script);

enum class VerdictKind { RuledOut, Silent, OutsideScope };

struct WitnessVerdict {
  VerdictKind kind = VerdictKind::Silent;
  std::string text;
  std::vector<std::string> flags;
  std::string note;
};

inline constexpr const char* kVerdictRuledOut = "classical-mediator models ruled out (non-classicality witnessed)";
inline constexpr const char* kVerdictSilent = "no verdict (witness silent)";
inline constexpr const char* kVerdictOutside = "protocol outside witness scope - not a counterexample";
inline constexpr const char* kInteroperabilityNote =
    "assumes interoperability of information between the probes and the mediator (not modelled)";

WitnessVerdict witness_verdict(const AuditReport& report, bool entangled);

/// JSON text document; see README for the schema. Throws MalformedScript.
ProtocolScript parse_script(const std::string& text);
ProtocolScript read_script(const std::string& path);
std::string script_to_json(const ProtocolScript& script);

}  // namespace hybrid
