#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bundlesim/config.hpp"
#include "bundlesim/correlations.hpp"

namespace bundlesim {

// What a subcommand produced. `text` goes to standard output, `warnings`
// to standard error. Data files named by `output` are written by the
// command itself, each with a `<output>.meta.json` sidecar.
struct CommandOutput {
  std::string text;
  std::vector<std::string> warnings;
  bool passed = true;  // false only for a failing validation run
  std::optional<ObservableRecord> record;
  std::vector<std::string> files;
};

// Observables at one point as JSON (needs delta_a).
CommandOutput run_steady(const Config& config);
// Grid sweep to CSV (stdout when no output path is set).
CommandOutput run_sweep_command(const Config& config);
// g_n^(2)(tau) traces plus the classification (needs delta_a).
CommandOutput run_gtau(const Config& config);
// Resonance curves as `chi,branch,delta_a_root` CSV.
CommandOutput run_resonance(const Config& config);
// Every invariant suite; passed is false if any suite fails.
CommandOutput run_validate(const Config& config);
// Two-mode model against the adiabatically eliminated one (needs delta_a).
CommandOutput run_fullmodel(const Config& config);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// hermiticity, conservation, projection, determinant roots, steady state,
// regression, determinism, convergence; in that order.
std::vector<SuiteResult> validation_suites(const Config& config);
SuiteResult validation_suite(std::string_view name, const Config& config);

// Steady state of the two-mode model: cavity a (kappa_a), auxiliary b
// (kappa_b), atoms with gamma only.
SteadyState solve_full_model(const SystemParams& params, const AuxCavityParams& aux,
                             const SpaceConfig& space);

}  // namespace bundlesim
