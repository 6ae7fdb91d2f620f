#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hybrid/experiment.hpp"

namespace {

constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

std::filesystem::path default_out_root() {
  if (const char* env = std::getenv("HYBRID_LAB_OUT"); env && *env) return env;
  return "hybridlab-out";
}

int run(const std::string& recipe, const std::string& config_path, std::string out_dir,
        const std::vector<std::string>& overrides, const std::optional<std::uint64_t>& seed,
        const std::optional<int>& grid_n) {
  using nlohmann::json;
  hybrid::ExperimentConfig config;
  try {
    json doc = json::object();
    std::filesystem::path base;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw hybrid::Error(hybrid::ErrorCode::ConfigError, "cannot open config '" + config_path + "'");
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw hybrid::Error(hybrid::ErrorCode::ConfigError, "config is not valid JSON: " + std::string(e.what()));
      }
      base = std::filesystem::path(config_path).parent_path();
    }
    if (doc.contains("experiment") && doc["experiment"].is_string() && !doc["experiment"].get<std::string>().empty() &&
        doc["experiment"].get<std::string>() != recipe)
      throw hybrid::Error(hybrid::ErrorCode::ConfigError,
                          "field 'experiment': config names '" + doc["experiment"].get<std::string>() +
                              "' but the command is '" + recipe + "'");
    doc["experiment"] = recipe;
    for (const auto& o : overrides) hybrid::apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    if (grid_n) doc["grid"]["points"] = *grid_n;
    config = hybrid::config_from_json(doc, base);
  } catch (const hybrid::Error& e) {
    std::cerr << "hybridlab: " << e.what() << "\n";
    return kExitConfig;
  }

  if (out_dir.empty()) out_dir = (default_out_root() / recipe).string();
  try {
    const hybrid::ExperimentResult result = hybrid::run_experiment(config);
    hybrid::write_outputs(result, config, out_dir);
    std::cout << result.summary << "outputs: " << out_dir << "\n";
    if (!result.failures.empty()) {
      for (const auto& f : result.failures) std::cerr << "hybridlab: invariant violated: " << f << "\n";
      return kExitInvariant;
    }
    return 0;
  } catch (const hybrid::Error& e) {
    std::cerr << "hybridlab: " << e.what() << "\n";
    switch (e.code()) {
      case hybrid::ErrorCode::ConfigError:
      case hybrid::ErrorCode::MalformedScript:
      case hybrid::ErrorCode::ParseError:
        return kExitConfig;
      default:
        return kExitInvariant;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid quantum-classical mediation laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int grid_n = 0;
  std::string selected;

  for (const auto& recipe : hybrid::kRecipes) {
    CLI::App* sub = app.add_subcommand(recipe, "run the " + recipe + " recipe");
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default $HYBRID_LAB_OUT/<recipe>)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--grid-n", grid_n, "grid points per axis");
    sub->add_option("--override", overrides, "key=value, dotted keys, value parsed as JSON")->take_all();
    sub->callback([&selected, recipe] { selected = recipe; });
  }
  app.add_subcommand("defaults", "print the default config")->callback([&selected] { selected = "defaults"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kExitConfig;
  }

  if (selected == "defaults") {
    std::cout << hybrid::default_config_json().dump(2) << "\n";
    return 0;
  }
  std::optional<std::uint64_t> seed_opt;
  std::optional<int> grid_opt;
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) seed_opt = seed;
    if (sub->count("--grid-n")) grid_opt = grid_n;
  }
  return run(selected, config_path, out_dir, overrides, seed_opt, grid_opt);
}
