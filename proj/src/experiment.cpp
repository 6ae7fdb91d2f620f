#include "hybrid/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hybrid/ensemble_algebra.hpp"
#include "hybrid/entanglement.hpp"
#include "hybrid/observable_parser.hpp"
#include "hybrid/protocol.hpp"
#include "hybrid/snapshot.hpp"

namespace hybrid {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + what);
}

std::string num(double v) {
  if (v == 0.0) return "0";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

const json& lookup(const json& doc, const std::string& dotted) {
  const json* node = &doc;
  std::size_t pos = 0;
  while (pos <= dotted.size()) {
    const std::size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (!node->is_object() || !node->contains(key)) config_error(dotted, "missing");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return *node;
}

template <typename T>
T field(const json& doc, const std::string& dotted) {
  try {
    return lookup(doc, dotted).get<T>();
  } catch (const json::exception& e) {
    config_error(dotted, std::string("wrong type (") + e.what() + ")");
  }
}

void reject_unknown(const json& doc, const json& defaults, const std::string& prefix) {
  if (!doc.is_object()) config_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) config_error(name, "unknown field");
    if (defaults[key].is_object()) reject_unknown(value, defaults[key], name);
  }
}

std::array<double, 3> triple(const json& doc, const std::string& dotted) {
  const auto v = field<std::vector<double>>(doc, dotted);
  if (v.size() != 3) config_error(dotted, "expected three numbers (q, q', x)");
  return {v[0], v[1], v[2]};
}

std::string joined(const std::vector<std::string>& items, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
  return s;
}

double max_moment_difference(const GaussianMoments& a, const GaussianMoments& b) {
  return std::max((a.mean() - b.mean()).cwiseAbs().maxCoeff(), (a.cov() - b.cov()).cwiseAbs().maxCoeff());
}

const char* const kPhaseNames[6] = {"q", "p", "qp", "pp", "x", "k"};

std::vector<std::string> moment_header() {
  std::vector<std::string> h{"t"};
  for (int i = 0; i < 6; ++i) h.push_back(std::string("mean_") + kPhaseNames[i]);
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) h.push_back(std::string("cov_") + kPhaseNames[i] + "_" + kPhaseNames[j]);
  return h;
}

std::vector<std::string> moment_row(double t, const GaussianMoments& g) {
  std::vector<std::string> r{num(t)};
  for (int i = 0; i < 6; ++i) r.push_back(num(g.mean()(i)));
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) r.push_back(num(g.cov()(i, j)));
  return r;
}

InteractionParams params_at(const ExperimentConfig& c, double t) { return {c.g1, c.g2, t}; }

HybridWavefunction transported(const GridSpec& grid, const PacketSpec& spec, const InteractionParams& p) {
  const HybridWavefunction psi = gaussian_product_state(grid, spec);
  return evolve_wavefunction(psi, p, spec.closed_form());
}

ExperimentResult mediate_gaussian(const ExperimentConfig& c) {
  ExperimentResult r;
  const GaussianMoments g0 = GaussianMoments::from_packets(c.initial);
  Csv series({"t", "log_negativity", "entangled", "log_negativity_given_x", "mutual_information",
              "cov_q_qp", "cov_p_pp"});
  Csv moments(moment_header());
  double worst_symplectic = 0.0;
  double en_first = 0.0, en_last = 0.0, cond_last = 0.0;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const double t = c.times[i];
    const Matrix6 s = heisenberg_matrix(params_at(c, t));
    worst_symplectic = std::max(
        worst_symplectic, (s * symplectic_form() * s.transpose() - symplectic_form()).cwiseAbs().maxCoeff());
    const GaussianMoments g = evolve_gaussian(g0, params_at(c, t));
    const double en = log_negativity(reduce_to_QQprime(g));
    const double cond = log_negativity(condition_on_mediator_position(g));
    const EntanglementVerdict v = judge_entanglement("log_negativity", en);
    series.row({num(t), num(en), v.entangled ? "true" : "false", num(cond), num(gaussian_mutual_information(g)),
                num(g.cov()(kQ, kQp)), num(g.cov()(kP, kPp))});
    moments.row(moment_row(t, g));
    if (i == 0) en_first = en;
    en_last = en;
    cond_last = cond;
  }
  if (worst_symplectic > 1e-12) r.failures.push_back("symplecticity S Omega S^T = Omega violated by " + num(worst_symplectic));
  r.files = {{"timeseries.csv", series.str()}, {"moments.csv", moments.str()}};
  std::ostringstream s;
  s << "mediate-gaussian: g1=" << num(c.g1) << " g2=" << num(c.g2) << ", " << c.times.size() << " times\n"
    << "E_N(t=" << num(c.times.front()) << ") = " << num(en_first) << "\n"
    << "E_N(t=" << num(c.times.back()) << ") = " << num(en_last) << " (threshold " << num(kEntanglementThreshold)
    << ")\n"
    << "E_N given a readout of x, t=" << num(c.times.back()) << ": " << num(cond_last) << "\n";
  r.summary = s.str();
  return r;
}

ExperimentResult mediate_grid(const ExperimentConfig& c) {
  ExperimentResult r;
  const GridSpec grid = c.grid();
  const HybridWavefunction psi0 = gaussian_product_state(grid, c.initial);
  const GaussianMoments g0 = GaussianMoments::from_packets(c.initial);
  MadelungFields madelung = to_madelung(psi0);
  double madelung_time = 0.0;
  Csv table({"t", "transport_vs_oracle", "madelung_vs_oracle", "transport_vs_madelung", "density_l2",
             "norm_drift", "madelung_steps"});
  Csv moments(moment_header());
  double worst = 0.0, worst_norm = 0.0;
  std::optional<HybridWavefunction> last;
  for (double t : c.times) {
    const InteractionParams p = params_at(c, t);
    HybridWavefunction psi = evolve_wavefunction(psi0, p, c.initial.closed_form());
    const InteractionParams segment{c.g1, c.g2, t - madelung_time};
    const int steps = madelung_steps(grid, segment);
    madelung = evolve_madelung(madelung, segment, steps);
    madelung_time = t;
    const GaussianMoments oracle = evolve_gaussian(g0, p);
    const GaussianMoments from_transport = measure_moments(psi);
    const GaussianMoments from_madelung_state = measure_moments(from_madelung(madelung));
    const double a = max_moment_difference(from_transport, oracle);
    const double b = max_moment_difference(from_madelung_state, oracle);
    const double d = max_moment_difference(from_transport, from_madelung_state);
    const double l2 = std::sqrt(quadrature(RealField((psi.density() - madelung.probability()).square()), grid));
    const double drift = std::abs(psi.norm() - 1.0);
    worst = std::max({worst, a, b, d});
    worst_norm = std::max(worst_norm, drift);
    table.row({num(t), num(a), num(b), num(d), num(l2), num(drift), std::to_string(steps)});
    moments.row(moment_row(t, from_transport));
    last = std::move(psi);
  }
  if (worst > c.tolerances.agreement)
    r.failures.push_back("three-way moment agreement " + num(worst) + " exceeds " + num(c.tolerances.agreement));
  if (worst_norm > c.tolerances.norm)
    r.failures.push_back("norm drift " + num(worst_norm) + " exceeds " + num(c.tolerances.norm));
  std::ostringstream snap;
  write_snapshot(snap, *last);
  r.files = {{"agreement.csv", table.str()}, {"moments.csv", moments.str()}, {"final_state.snap", snap.str()}};
  std::ostringstream s;
  s << "mediate-grid: N=" << grid.points() << " L=" << num(grid.half_width()) << " g1=" << num(c.g1)
    << " g2=" << num(c.g2) << "\n"
    << "max moment disagreement (transport, Madelung, oracle): " << num(worst) << " (tolerance "
    << num(c.tolerances.agreement) << ")\n"
    << "max norm drift: " << num(worst_norm) << "\n";
  r.summary = s.str();
  return r;
}

std::vector<NamedState> random_states(const ExperimentConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::vector<NamedState> states;
  for (int i = 0; i < c.random_states; ++i)
    states.emplace_back("random-" + std::to_string(i), random_smooth_state(c.grid(), rng));
  return states;
}

ExperimentResult bracket_check(const ExperimentConfig& c) {
  ExperimentResult r;
  std::vector<ObservablePair> pairs;
  for (const auto& [a, b] : c.pairs) pairs.emplace_back(parse_observable(a), parse_observable(b));
  const HomomorphismReport report = check_homomorphism(pairs, random_states(c));
  Csv table({"first", "second", "state", "bracket", "image", "residual"});
  for (const auto& rec : report.records)
    table.row({rec.first, rec.second, rec.state_id, num(rec.value), num(rec.expected), num(rec.residual)});
  if (report.max_residual >= c.tolerances.bracket)
    r.failures.push_back("homomorphism residual " + num(report.max_residual) + " exceeds " + num(c.tolerances.bracket));
  r.files = {{"brackets.csv", table.str()}};
  std::ostringstream s;
  s << "bracket-check: " << pairs.size() << " pairs x " << c.random_states << " random states (seed " << c.seed
    << ")\nmax residual: " << num(report.max_residual) << " (tolerance " << num(c.tolerances.bracket) << ")\n";
  r.summary = s.str();
  return r;
}

ExperimentResult separability_scan(const ExperimentConfig& c) {
  ExperimentResult r;
  const GridSpec grid = c.grid();
  const InteractionParams p = params_at(c, c.times.back());
  PacketSpec chirped = c.initial;
  chirped.chirps[0] += 0.5;
  struct Case {
    std::string id;
    bool product;
    MadelungFields state;
  };
  std::vector<Case> cases;
  cases.push_back({"product", true, to_madelung(gaussian_product_state(grid, c.initial))});
  cases.push_back({"entangled", false, to_madelung(transported(grid, c.initial, p))});
  cases.push_back({"entangled-chirped", false, to_madelung(transported(grid, chirped, p))});

  Csv table({"quantum", "classical", "state", "value", "expected_zero", "nonzero"});
  double worst_zero = 0.0;
  int nonzero = 0;
  for (const auto& mq : c.quantum_observables) {
    const EnsembleObservable m = parse_observable(mq);
    for (const auto& fc : c.classical_observables) {
      const EnsembleObservable f = parse_observable(fc);
      for (const Case& cs : cases) {
        const double v = strong_separability(m, f, cs.state);
        const bool expected_zero = cs.product || f.classical_payload().is_linear();
        const bool is_nonzero = std::abs(v) > c.tolerances.structural;
        if (expected_zero) worst_zero = std::max(worst_zero, std::abs(v));
        if (is_nonzero) ++nonzero;
        table.row({mq, fc, cs.id, num(v), expected_zero ? "true" : "false", is_nonzero ? "true" : "false"});
      }
    }
  }
  if (worst_zero >= c.tolerances.structural)
    r.failures.push_back("strong separability on product states / linear f broken by " + num(worst_zero));
  r.files = {{"separability.csv", table.str()}};
  std::ostringstream s;
  s << "separability-scan: " << c.quantum_observables.size() << " quantum x " << c.classical_observables.size()
    << " classical observables x " << cases.size() << " states\n"
    << "largest value where zero is expected: " << num(worst_zero) << "\n"
    << "pairs violating strong separability: " << nonzero << "\n";
  r.summary = s.str();
  return r;
}

ExperimentResult k_sensitivity_recipe(const ExperimentConfig& c) {
  ExperimentResult r;
  const InteractionParams p = params_at(c, c.times.back());
  const auto rows = k_sensitivity(c.k_variances, p, c.x_variance);
  Csv table({"k_variance", "log_negativity", "log_negativity_given_x"});
  std::ostringstream s;
  s << "k-sensitivity: t=" << num(p.t) << " g1=" << num(p.g1) << " g2=" << num(p.g2) << " Var(x)="
    << num(c.x_variance) << "\n";
  double spread = 0.0, spread_cond = 0.0;
  for (const auto& a : rows) {
    table.row({num(a.k_variance), num(a.log_negativity), num(a.conditioned_log_negativity)});
    s << "  Var(k)=" << num(a.k_variance) << "  E_N=" << num(a.log_negativity)
      << "  E_N given x=" << num(a.conditioned_log_negativity) << "\n";
    for (const auto& b : rows) {
      spread = std::max(spread, std::abs(a.log_negativity - b.log_negativity));
      spread_cond = std::max(spread_cond, std::abs(a.conditioned_log_negativity - b.conditioned_log_negativity));
    }
  }
  s << "spread of E_N: " << num(spread) << "; given x: " << num(spread_cond) << "\n";
  r.files = {{"k_sensitivity.csv", table.str()}};
  r.summary = s.str();
  return r;
}

ExperimentResult classical_twin_recipe(const ExperimentConfig& c) {
  ExperimentResult r;
  const GaussianMoments q0 = GaussianMoments::from_packets(c.initial, Tag::Quantum);
  const GaussianMoments c0 = GaussianMoments::from_packets(c.initial, Tag::Classical);
  Csv table({"t", "corr_q_qp", "mutual_information", "identical_to_quantum", "entanglement_query"});
  bool all_identical = true, all_refused = true;
  double mi_last = 0.0, corr_last = 0.0;
  for (double t : c.times) {
    const GaussianMoments twin = classical_twin(c0, params_at(c, t));
    const GaussianMoments quantum = evolve_gaussian(q0, params_at(c, t));
    const bool identical = twin.cov() == quantum.cov() && twin.mean() == quantum.mean();
    std::string refusal = "answered";
    int refused = 0;
    try {
      reduce_to_QQprime(twin);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TagRefusal) ++refused;
    }
    try {
      condition_on_mediator_position(twin);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TagRefusal) ++refused;
    }
    if (refused == 2) refusal = "TagRefusal";
    const Matrix6& cov = twin.cov();
    const double corr = cov(kQ, kQp) / std::sqrt(cov(kQ, kQ) * cov(kQp, kQp));
    const double mi = gaussian_mutual_information(twin);
    all_identical = all_identical && identical;
    all_refused = all_refused && refused == 2;
    table.row({num(t), num(corr), num(mi), identical ? "true" : "false", refusal});
    mi_last = mi;
    corr_last = corr;
  }
  if (!all_identical) r.failures.push_back("classical twin covariance differs from the quantum run");
  if (!all_refused) r.failures.push_back("an entanglement query on classical-tagged moments was answered");
  r.files = {{"twin.csv", table.str()}};
  std::ostringstream s;
  s << "classical-twin: t=" << num(c.times.back()) << " corr(q,q')=" << num(corr_last)
    << " mutual information=" << num(mi_last) << "\n"
    << "covariance identical to quantum run at every time: " << (all_identical ? "yes" : "no") << "\n"
    << "entanglement queries refused (TagRefusal): " << (all_refused ? "yes" : "no") << "\n";
  r.summary = s.str();
  return r;
}

ExperimentResult qubit_protocol_recipe(const ExperimentConfig& c) {
  ExperimentResult r;
  const TwoQubitState rho0 = TwoQubitState::named(c.qubit.rho0);
  const TwoQubitState rho1 = TwoQubitState::named(c.qubit.rho1);
  const HrProtocolTrace trace = hr_qubit_protocol(rho0, rho1, named_gate(c.qubit.fix), parse_party(c.qubit.target));
  Csv table({"stage", "bit", "probability", "negativity", "chsh_max"});
  const auto& br = trace.preparation.branches();
  for (std::size_t b = 0; b < br.size(); ++b)
    table.row({"prepared", std::to_string(b), num(br[b].probability), num(negativity_qubits(br[b].state)),
               num(chsh_max(br[b].state))});
  table.row({"mixture", "-", "1", num(negativity_qubits(trace.mixture)), num(chsh_max(trace.mixture))});
  for (std::size_t b = 0; b < 2; ++b)
    table.row({"after_fix", std::to_string(b), "0.5", num(negativity_qubits(trace.branches_after[b])),
               num(chsh_max(trace.branches_after[b]))});
  table.row({"final", "-", "1", num(negativity_qubits(trace.final_state)), num(chsh_max(trace.final_state))});
  const double holevo = holevo_information(trace.preparation);
  r.files = {{"trace.csv", table.str()}};
  std::ostringstream s;
  s << "qubit-protocol: rho0=" << c.qubit.rho0 << " rho1=" << c.qubit.rho1 << " fix=" << c.qubit.fix << " on "
    << c.qubit.target << "\n"
    << "Holevo information of the preparation: " << num(holevo) << " bit\n"
    << "mixture before the bit is revealed: negativity " << num(negativity_qubits(trace.mixture)) << ", CHSH "
    << num(chsh_max(trace.mixture)) << "\n"
    << "final state: negativity " << num(negativity_qubits(trace.final_state)) << ", CHSH "
    << num(chsh_max(trace.final_state)) << "\n";
  r.summary = s.str();
  return r;
}

ExperimentResult audit_recipe(const ExperimentConfig& c) {
  ExperimentResult r;
  if (c.script.empty()) config_error("script", "the audit recipe needs a protocol script");
  const ProtocolScript script = read_script(c.script);
  const AuditReport report = audit(script);
  const WitnessVerdict verdict = witness_verdict(report, c.entangled);
  json flags = json::array();
  for (AuditFlag f : report.flags) flags.push_back(flag_name(f));
  const json doc{{"script", script.name},
                 {"flags", flags},
                 {"witness_applicable", report.witness_applicable},
                 {"audit", report.verdict},
                 {"notes", report.notes},
                 {"preparation_holevo_bits", report.preparation_holevo},
                 {"probe_mutual_information_bits", report.probe_mutual_information},
                 {"entangled", c.entangled},
                 {"verdict", verdict.text},
                 {"verdict_note", verdict.note}};
  if (!report.flags.empty() && verdict.kind == VerdictKind::RuledOut)
    r.failures.push_back("a flagged protocol produced a ruled-out verdict");
  r.files = {{"audit.json", doc.dump(2) + "\n"}};
  std::ostringstream s;
  s << "audit: " << (script.name.empty() ? c.script : script.name) << "\n"
    << "flags: " << (verdict.flags.empty() ? "none" : joined(verdict.flags)) << "\n"
    << "witness applicable: " << (report.witness_applicable ? "yes" : "no") << "\n"
    << "verdict: " << verdict.text << "\n"
    << "note: " << verdict.note << "\n";
  for (const auto& n : report.notes) s << "note: " << n << "\n";
  r.summary = s.str();
  return r;
}

}  // namespace

json default_config_json() {
  return json{
      {"experiment", ""},
      {"hbar", 1.0},
      {"grid", {{"half_width", 8.0}, {"points", 64}}},
      {"couplings", {{"g1", 1.0}, {"g2", 1.0}}},
      {"times", {0.0, 0.25, 0.5, 0.75, 1.0}},
      {"initial_state",
       {{"centers", {0.0, 0.0, 0.0}},
        {"widths", {1.0, 1.0, 1.0}},
        {"momenta", {0.0, 0.0, 0.0}},
        {"chirps", {0.0, 0.0, 0.0}}}},
      {"pairs", json::array({json::array({"C: x", "C: k"}), json::array({"C: x", "C: x*k"}),
                             json::array({"C: x^2", "C: k"}), json::array({"Q: q", "Q: p"}),
                             json::array({"Q: q'", "Q: p'"}), json::array({"Q: q", "Q: q'"})})},
      {"separability",
       {{"quantum", {"Q: q", "Q: p", "Q: q'", "Q: p^2", "Q: q*p"}},
        {"classical", {"C: x", "C: k", "C: x*k", "C: k^2", "C: x*k^2"}}}},
      {"k_variances", {0.5, 1.0, 2.0}},
      {"x_variance", kVacuumVariance},
      {"qubit", {{"rho0", "phi+"}, {"rho1", "phi-"}, {"fix", "Z"}, {"target", "Q'"}}},
      {"script", ""},
      {"entangled", true},
      {"random_states", 5},
      {"seed", 20240101},
      {"tolerances", {{"bracket", 1e-4}, {"agreement", 1e-3}, {"structural", 1e-6}, {"norm", 1e-9}}},
  };
}

void apply_override(json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) config_error(key, "empty path component");
    if (!node->is_object()) config_error(key, "cannot descend into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  const json defaults = default_config_json();
  reject_unknown(doc, defaults, "");
  json merged = defaults;
  merged.merge_patch(doc);

  ExperimentConfig c;
  c.experiment = field<std::string>(merged, "experiment");
  try {
    Constants::validate_hbar(field<double>(merged, "hbar"));
  } catch (const Error& e) {
    config_error("hbar", e.what());
  }
  c.half_width = field<double>(merged, "grid.half_width");
  c.points = field<int>(merged, "grid.points");
  if (!(c.half_width > 0.0)) config_error("grid.half_width", "must be positive");
  if (c.points < 8) config_error("grid.points", "must be at least 8");
  c.g1 = field<double>(merged, "couplings.g1");
  c.g2 = field<double>(merged, "couplings.g2");
  if (!std::isfinite(c.g1)) config_error("couplings.g1", "must be finite");
  if (!std::isfinite(c.g2)) config_error("couplings.g2", "must be finite");
  c.times = field<std::vector<double>>(merged, "times");
  if (c.times.empty()) config_error("times", "needs at least one time");
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (!(c.times[i] >= 0.0) || !std::isfinite(c.times[i])) config_error("times", "times must be finite and >= 0");
    if (i > 0 && !(c.times[i] > c.times[i - 1])) config_error("times", "must be strictly increasing");
  }
  c.initial.centers = triple(merged, "initial_state.centers");
  c.initial.widths = triple(merged, "initial_state.widths");
  c.initial.momenta = triple(merged, "initial_state.momenta");
  c.initial.chirps = triple(merged, "initial_state.chirps");
  for (double w : c.initial.widths)
    if (!(w > 0.0)) config_error("initial_state.widths", "widths must be positive");

  for (const auto& pair : field<std::vector<std::vector<std::string>>>(merged, "pairs")) {
    if (pair.size() != 2) config_error("pairs", "each pair needs two observables");
    c.pairs.emplace_back(pair[0], pair[1]);
  }
  c.quantum_observables = field<std::vector<std::string>>(merged, "separability.quantum");
  c.classical_observables = field<std::vector<std::string>>(merged, "separability.classical");
  try {
    for (const auto& [a, b] : c.pairs) {
      parse_observable(a);
      parse_observable(b);
    }
  } catch (const Error& e) {
    config_error("pairs", e.what());
  }
  try {
    for (const auto& m : c.quantum_observables)
      if (parse_observable(m).sector() != Sector::Quantum) config_error("separability.quantum", "'" + m + "' is classical");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error("separability.quantum", e.what());
  }
  try {
    for (const auto& f : c.classical_observables)
      if (parse_observable(f).sector() != Sector::Classical)
        config_error("separability.classical", "'" + f + "' is quantum");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error("separability.classical", e.what());
  }

  c.k_variances = field<std::vector<double>>(merged, "k_variances");
  c.x_variance = field<double>(merged, "x_variance");
  if (!(c.x_variance > 0.0)) config_error("x_variance", "must be positive");
  c.qubit.rho0 = field<std::string>(merged, "qubit.rho0");
  c.qubit.rho1 = field<std::string>(merged, "qubit.rho1");
  c.qubit.fix = field<std::string>(merged, "qubit.fix");
  c.qubit.target = field<std::string>(merged, "qubit.target");
  try {
    TwoQubitState::named(c.qubit.rho0);
    TwoQubitState::named(c.qubit.rho1);
  } catch (const Error& e) {
    config_error("qubit", e.what());
  }
  try {
    named_gate(c.qubit.fix);
  } catch (const Error& e) {
    config_error("qubit.fix", e.what());
  }
  if (c.qubit.target != "Q" && c.qubit.target != "Q'") config_error("qubit.target", "must be Q or Q'");

  c.script = field<std::string>(merged, "script");
  if (!c.script.empty()) {
    std::filesystem::path p(c.script);
    if (p.is_relative() && !base_dir.empty() && !std::filesystem::exists(p)) p = base_dir / p;
    if (!std::filesystem::exists(p)) config_error("script", "file '" + c.script + "' does not exist");
    c.script = p.string();
  }
  c.entangled = field<bool>(merged, "entangled");
  c.random_states = field<int>(merged, "random_states");
  if (c.random_states < 1) config_error("random_states", "must be at least 1");
  c.seed = field<std::uint64_t>(merged, "seed");
  c.tolerances.bracket = field<double>(merged, "tolerances.bracket");
  c.tolerances.agreement = field<double>(merged, "tolerances.agreement");
  c.tolerances.structural = field<double>(merged, "tolerances.structural");
  c.tolerances.norm = field<double>(merged, "tolerances.norm");
  for (const char* t : {"bracket", "agreement", "structural", "norm"})
    if (!(field<double>(merged, std::string("tolerances.") + t) > 0.0))
      config_error(std::string("tolerances.") + t, "must be positive");
  return c;
}

MadelungFields random_smooth_state(const GridSpec& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(-0.8, 0.8), width(0.8, 1.2), momentum(-0.8, 0.8),
      chirp(-0.3, 0.3), coupling(-0.6, 0.6);
  PacketSpec spec;
  for (int a = 0; a < 3; ++a) {
    spec.centers[a] = centre(rng);
    spec.widths[a] = width(rng);
    spec.momenta[a] = momentum(rng);
    spec.chirps[a] = chirp(rng);
  }
  const double g1 = coupling(rng);
  const double g2 = coupling(rng);
  const FlowMap flow(InteractionParams{g1, g2, 1.0});
  const ClosedForm form = [spec, flow](double q, double qp, double x) {
    const Eigen::Vector3d z = flow.inverse(Eigen::Vector3d(q, qp, x));
    return spec.amplitude(z(0), z(1), z(2));
  };
  return to_madelung(sample_closed_form(grid, form));
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  ExperimentResult r;
  if (c.experiment == "mediate-gaussian") r = mediate_gaussian(c);
  else if (c.experiment == "mediate-grid") r = mediate_grid(c);
  else if (c.experiment == "bracket-check") r = bracket_check(c);
  else if (c.experiment == "separability-scan") r = separability_scan(c);
  else if (c.experiment == "k-sensitivity") r = k_sensitivity_recipe(c);
  else if (c.experiment == "classical-twin") r = classical_twin_recipe(c);
  else if (c.experiment == "qubit-protocol") r = qubit_protocol_recipe(c);
  else if (c.experiment == "audit") r = audit_recipe(c);
  else config_error("experiment", "unknown recipe '" + c.experiment + "'");
  r.experiment = c.experiment;
  if (!r.failures.empty()) {
    r.summary += "INVARIANT FAILURES:\n";
    for (const auto& f : r.failures) r.summary += "  " + f + "\n";
  }
  return r;
}

void write_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + (out_dir / name).string() + "'");
    out << content;
  };
  json files = json::array();
  for (const auto& f : result.files) {
    write(f.name, f.content);
    files.push_back({{"name", f.name}, {"bytes", f.content.size()}});
  }
  write("summary.txt", result.summary);
  files.push_back({{"name", "summary.txt"}, {"bytes", result.summary.size()}});
  const json manifest{{"experiment", result.experiment},
                      {"seed", config.seed},
                      {"grid", {{"half_width", config.half_width}, {"points", config.points}}},
                      {"couplings", {{"g1", config.g1}, {"g2", config.g2}}},
                      {"times", config.times},
                      {"status", result.failures.empty() ? "ok" : "invariant-failure"},
                      {"failures", result.failures},
                      {"files", files}};
  write("manifest.json", manifest.dump(2) + "\n");

  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&tt), "%Y-%m-%dT%H:%M:%SZ");
  write("metadata.json", json{{"created_utc", stamp.str()}}.dump(2) + "\n");
}

}  // namespace hybrid
