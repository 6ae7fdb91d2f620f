#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hybrid/config_space.hpp"
#include "hybrid/dynamics.hpp"

namespace hybrid {

inline const std::vector<std::string> kRecipes{
    "mediate-gaussian", "mediate-grid", "bracket-check", "separability-scan",
    "k-sensitivity",    "classical-twin", "qubit-protocol", "audit"};

struct Tolerances {
  double bracket = 1e-4;
  double agreement = 1e-3;
  double structural = 1e-6;
  double norm = 1e-9;
};

struct QubitProtocolConfig {
  std::string rho0 = "phi+";
  std::string rho1 = "phi-";
  std::string fix = "Z";
  std::string target = "Q'";
};

struct ExperimentConfig {
  std::string experiment;
  double half_width = 8.0;
  int points = 64;
  double g1 = 1.0;
  double g2 = 1.0;
  std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  PacketSpec initial;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> quantum_observables;
  std::vector<std::string> classical_observables;
  std::vector<double> k_variances{0.5, 1.0, 2.0};
  double x_variance = kVacuumVariance;
  QubitProtocolConfig qubit;
  std::string script;
  bool entangled = true;
  int random_states = 5;
  std::uint64_t seed = 20240101;
  Tolerances tolerances;

  GridSpec grid() const { return GridSpec(half_width, points); }
};

/// Every key with its default value.
nlohmann::json default_config_json();

/// Sets a dotted key (e.g. "couplings.g1") to a JSON-parsed value, or to the
/// raw string when the value is not valid JSON. Throws ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Merges `doc` over the defaults and validates. Unknown keys, wrong types
/// and out-of-range values throw ConfigError naming the field. Relative
/// script paths are resolved against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});

struct OutputFile {
  std::string name;
  std::string content;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<OutputFile> files;
  std::string summary;
  /// Violated invariants; empty on success.
  std::vector<std::string> failures;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes every result file plus summary.txt, manifest.json and
/// metadata.json (the only file carrying a timestamp).
void write_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                   const std::filesystem::path& out_dir);

/// Smooth normalized non-product state: a random Gaussian packet pushed
/// through a random flow map.
MadelungFields random_smooth_state(const GridSpec& grid, std::mt19937_64& rng);

}  // namespace hybrid
