#pragma once

// Experiment orchestration: configuration files, recipes (named bundles of
// defaults), the run/sweep/wmap pipelines, and JSON reports.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldg/energy.hpp"
#include "ldg/grid.hpp"

namespace ldg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigInvalid = 2;
inline constexpr int kExitSolveFailed = 3;
inline constexpr int kExitCheckFailed = 4;

inline constexpr const char* kVersion = "ldgfilm 1.0.0";

enum class EnergyKind { LdG, GinzburgLandau, ChernSimonsHiggs };
enum class InitKind { Ansatz, Random, Constant, Restart };

struct RunConfig {
  std::string recipe = "theorem-A";
  std::uint64_t seed = 1;

  ShapeSpec shape;
  double resolution = 64.0;

  EnergyKind energy = EnergyKind::LdG;
  double L1 = 1.0, L2 = 0.0, L3 = 0.0;
  double bulk_a = -1.0, bulk_b = 1.0, bulk_c = 1.0;

  int k = 1;
  double offset = 0.0;

  std::vector<double> eps;  // strictly decreasing ladder
  double tol = 1e-6;
  int max_iters = 20000;
  double perturb = 0.0;
  int memory = 8;

  InitKind init = InitKind::Ansatz;
  int random_starts = 0;
  std::string restart_file;

  std::vector<std::string> checks;
  double mu = 0.1;           // well-neighbourhood radius for the bad set
  double rho = 0.25;         // exclusion radius of Omega_rho
  int scan = 24;             // W scan lattice cells across the domain
  std::vector<double> tau;   // cell-problem ladder
  double beta = 1.0471975511965976;  // rotation used by the cell-problem beta check
  std::vector<double> annulus_rho;
  bool write_all_rungs = false;

  std::filesystem::path out = "out";

  bool has_check(const std::string& name) const;
  /// Model parameters at the first rung. Planar energies use s = 2.
  ModelParams params() const;
  double well_s() const;
  /// Throws Error(ConfigInvalid) with the reason.
  void validate() const;
  /// Echo of every input parameter (the output directory is excluded).
  nlohmann::json to_json() const;
};

/// Names of the built-in recipes.
std::vector<std::string> recipe_names();
/// INI text of a recipe's defaults.
std::string recipe_defaults(const std::string& name);

/// Parses INI text: recipe defaults first, then the given values on top.
/// Unknown keys and malformed values raise Error(ConfigInvalid).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

struct Outcome {
  int exit_code = kExitOk;
  nlohmann::json report;
};

/// Executes the recipe's pipeline and writes artifacts under config.out.
Outcome run(const RunConfig& config);

enum class SweepParam { Eps, K, Resolution };
/// eps: geometric ladder from -> to with warm starts and an asymptotics fit.
/// k: one run per integer in [from, to]. resolution: geometric values at the
/// last eps of the config, with Richardson ratios of the energy.
Outcome sweep(const RunConfig& config, SweepParam param, double from, double to, int rungs);

/// W landscape CSV (k <= 2) and the argmin configuration.
Outcome wmap(const RunConfig& config, int k, int scan);

/// Writes report.json (pretty-printed, trailing newline) under config.out.
void write_report(const std::filesystem::path& dir, const nlohmann::json& report);

}  // namespace ldg
